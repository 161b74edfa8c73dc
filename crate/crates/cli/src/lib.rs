//! `kaf` — run time-series prediction benchmarks for the adaptive filter
//! library and emit the result tables as CSV.
//!
//! Verbs: `run` (learning curves + final table), `sweep` (noise robustness),
//! `dict-trace` (dictionary growth and snapshots), `list-algos`. All accept a
//! flat key-value config file plus flag overrides; built-in defaults
//! reproduce the Mackey-Glass protocol (window 7, horizon 1, σ = 0.04,
//! γ = √5·σ, K = 7, 50 runs).

pub mod commands;
pub mod emit;
pub mod settings;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::path::PathBuf;

/// Error with the process exit code baked in: 1 usage, 2 config, 3 runtime/IO.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<kaf_core::Error> for CliError {
    fn from(e: kaf_core::Error) -> Self {
        match e {
            kaf_core::Error::InvalidConfig(_)
            | kaf_core::Error::Parse { .. }
            | kaf_core::Error::EmptyInput(_) => CliError::Config(e.to_string()),
            kaf_core::Error::Io { .. } => CliError::Runtime(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kaf",
    version,
    about = "Online adaptive filtering benchmarks: linear and kernel, with set-membership updates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a prediction experiment; writes final_table.csv,
    /// learning_curves.csv and dict_sizes.csv
    Run(RunArgs),
    /// Rerun the experiment across noise levels; writes robustness.csv
    Sweep(SweepArgs),
    /// Trace dictionary growth; writes dict_sizes.csv plus a final
    /// dictionary snapshot per kernel algorithm
    DictTrace(RunArgs),
    /// List the available algorithm names
    ListAlgos,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Config file (flat `section.key = value` lines)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Data source: mackey-glass | file
    #[arg(long)]
    pub series: Option<String>,
    /// Series file for `--series file`
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Training pairs
    #[arg(long)]
    pub train: Option<usize>,
    /// Held-out test pairs
    #[arg(long)]
    pub test: Option<usize>,
    /// Monte-Carlo runs
    #[arg(long)]
    pub runs: Option<usize>,
    /// Comma-separated algorithm list (see list-algos)
    #[arg(long)]
    pub algos: Option<String>,
    /// Noise standard deviation
    #[arg(long)]
    pub noise: Option<f64>,
    /// Error bound for set-membership variants: auto (√5·σ) or a number
    #[arg(long)]
    pub gamma: Option<String>,
    /// Base seed for the per-run noise generators
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: $KAF_OUT_DIR, then .)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Comma-separated noise levels, e.g. 0.01,0.02,0.04,0.08
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub series: Option<String>,
    #[arg(long)]
    pub path: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long)]
    pub test: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub algos: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses argv and runs the command, translating every failure into the
/// documented exit codes. `--help`/`--version` exit 0.
pub fn run_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
