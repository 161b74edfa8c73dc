//! Verb implementations behind the argument parsing.

use std::fs;
use std::path::Path;

use kaf_core::harness::{
    build_filter, robustness_sweep, run_experiment, AlgorithmId, AnyFilter, ExperimentConfig,
};
use kaf_core::timeseries::{add_noise, embed};
use kaf_core::OnlineFilter;

use crate::emit;
use crate::settings::Settings;
use crate::{Cli, CliError, Command, RunArgs, SweepArgs};

const KERNEL_ROSTER: [AlgorithmId; 4] = [
    AlgorithmId::Klms,
    AlgorithmId::SmNklms,
    AlgorithmId::Kapa2,
    AlgorithmId::SmKap,
];

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => run_cmd(&args),
        Command::Sweep(args) => sweep_cmd(&args),
        Command::DictTrace(args) => dict_trace_cmd(&args),
        Command::ListAlgos => {
            for id in AlgorithmId::ALL {
                let family = if id.is_kernel() { "kernel" } else { "linear" };
                let gate = if id.is_set_membership() {
                    ", set-membership"
                } else {
                    ""
                };
                println!("{id:<10} ({family}{gate})");
            }
            Ok(())
        }
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

pub fn run_cmd(args: &RunArgs) -> Result<(), CliError> {
    let settings = Settings::from_run_args(args)?;
    let cfg = settings.experiment_config(&AlgorithmId::ALL)?;
    let out_dir = settings.resolve_out_dir();
    ensure_out_dir(&out_dir)?;

    let report = run_experiment(&cfg)?;
    emit::write_final_table(&out_dir, &report)?;
    emit::write_learning_curves(&out_dir, &report)?;
    emit::write_dict_sizes(&out_dir, &report)?;
    print!("{}", emit::render_final_table(&report));
    Ok(())
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<(), CliError> {
    let (settings, levels) = Settings::from_sweep_args(args)?;
    let cfg = settings.experiment_config(&AlgorithmId::ALL)?;
    let out_dir = settings.resolve_out_dir();
    ensure_out_dir(&out_dir)?;

    let rows = robustness_sweep(&cfg, &levels)?;
    emit::write_robustness(&out_dir, &rows)?;
    print!("{}", emit::render_robustness(&rows));
    Ok(())
}

pub fn dict_trace_cmd(args: &RunArgs) -> Result<(), CliError> {
    let settings = Settings::from_run_args(args)?;
    let cfg = settings.experiment_config(&KERNEL_ROSTER)?;
    let out_dir = settings.resolve_out_dir();
    ensure_out_dir(&out_dir)?;

    let report = run_experiment(&cfg)?;
    emit::write_dict_sizes(&out_dir, &report)?;

    // final dictionary snapshots from a run-0 trial of each kernel algorithm
    for (filter, id) in run_zero_filters(&cfg)? {
        if let AnyFilter::Kernel(kernel_filter) = filter {
            emit::write_dictionary_snapshot(
                &out_dir,
                id.name(),
                kernel_filter.dictionary(),
                &kernel_filter.config().kernel,
            )?;
        }
    }
    Ok(())
}

/// Replays the run-0 training stream and hands back each algorithm's final
/// filter state.
fn run_zero_filters(cfg: &ExperimentConfig) -> Result<Vec<(AnyFilter, AlgorithmId)>, CliError> {
    cfg.validate()?;
    let mut series_cfg = cfg.series.clone();
    if series_cfg.length == 0 {
        series_cfg.length = cfg.required_series_len();
    }
    let base = series_cfg.base_series()?;
    let noisy = add_noise(&base, cfg.series.noise_std, cfg.series.seed)?;
    let data = embed(&noisy, cfg.embed_window, cfg.horizon)?
        .with_split(cfg.train_count, cfg.test_count)?;
    let (train_x, train_d) = data.train_pairs();

    let mut filters = Vec::new();
    for &id in &cfg.algorithms {
        let mut filter = build_filter(id, &cfg.params, cfg.embed_window, cfg.series.noise_std)?;
        for (x, &d) in train_x.iter().zip(train_d) {
            filter.update(x, d)?;
        }
        filters.push((filter, id));
    }
    Ok(filters)
}
