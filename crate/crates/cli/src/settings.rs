//! Experiment settings: built-in defaults, overlaid by an optional config
//! file, overlaid by command-line flags.
//!
//! Config files are flat UTF-8 text, one `section.key = value` per line,
//! `#` starts a comment line, blank lines are ignored. Unknown keys are
//! rejected by name. The same defaults apply with no file at all: they
//! reproduce the benchmark protocol (window 7, horizon 1, σ = 0.04,
//! γ = √5·σ, K = 7, KLMS step 0.05, unit kernel bandwidth, 1500 training
//! pairs for the generated series or 3500 for file series, 100 test pairs,
//! 50 runs).

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use kaf_core::harness::{AlgorithmId, ExperimentConfig, GammaSpec, ParamsTable};
use kaf_core::kernel::GaussianExponent;
use kaf_core::timeseries::{MackeyGlassParams, SeriesConfig, SeriesSource};

use crate::{CliError, RunArgs, SweepArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    MackeyGlass,
    File,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub source: SourceKind,
    pub path: Option<PathBuf>,
    pub noise_std: f64,
    pub seed: u64,
    /// Series samples; 0 derives the minimum from the split.
    pub length: usize,
    pub mg: MackeyGlassParams,
    pub embed_window: usize,
    pub horizon: usize,
    /// Unset picks the per-source default (1500 generated, 3500 file).
    pub train: Option<usize>,
    pub test: usize,
    pub runs: usize,
    /// Unset picks the verb's default roster.
    pub algos: Option<Vec<AlgorithmId>>,
    pub params: ParamsTable,
    pub out_dir: Option<PathBuf>,
    pub sweep_levels: Vec<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            source: SourceKind::MackeyGlass,
            path: None,
            noise_std: 0.04,
            seed: 0,
            length: 0,
            mg: MackeyGlassParams::default(),
            embed_window: 7,
            horizon: 1,
            train: None,
            test: 100,
            runs: 50,
            algos: None,
            params: ParamsTable::default(),
            out_dir: None,
            sweep_levels: vec![0.01, 0.02, 0.04, 0.08],
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value.parse().map_err(|_| {
        CliError::Config(format!(
            "line {line}: cannot parse {value:?} as a value for {key}"
        ))
    })
}

fn parse_gamma(key: &str, value: &str, line: usize) -> Result<GammaSpec, CliError> {
    if value.eq_ignore_ascii_case("auto") {
        Ok(GammaSpec::Auto)
    } else {
        Ok(GammaSpec::Fixed(parse_value(key, value, line)?))
    }
}

pub fn parse_algo_list(list: &str) -> Result<Vec<AlgorithmId>, CliError> {
    let algos = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.parse::<AlgorithmId>()
                .map_err(|e| CliError::Config(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if algos.is_empty() {
        return Err(CliError::Config("empty algorithm list".into()));
    }
    Ok(algos)
}

pub fn parse_noise_list(list: &str) -> Result<Vec<f64>, CliError> {
    let levels = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad noise level {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if levels.is_empty() {
        return Err(CliError::Config("empty noise level list".into()));
    }
    for &l in &levels {
        if !l.is_finite() || l < 0.0 {
            return Err(CliError::Config(format!(
                "noise level {l} must be nonnegative"
            )));
        }
    }
    Ok(levels)
}

impl Settings {
    /// Defaults, then config file (when given), then flags.
    pub fn from_run_args(args: &RunArgs) -> Result<Self, CliError> {
        let mut s = Settings::default();
        if let Some(path) = &args.config {
            s.apply_file(path)?;
        }
        s.apply_run_flags(args)?;
        Ok(s)
    }

    pub fn from_sweep_args(args: &SweepArgs) -> Result<(Self, Vec<f64>), CliError> {
        let run_args = RunArgs {
            config: args.config.clone(),
            series: args.series.clone(),
            path: args.path.clone(),
            train: args.train,
            test: args.test,
            runs: args.runs,
            algos: args.algos.clone(),
            noise: None,
            gamma: args.gamma.clone(),
            seed: args.seed,
            out: args.out.clone(),
        };
        let s = Settings::from_run_args(&run_args)?;
        let levels = match &args.noise {
            Some(list) => parse_noise_list(list)?,
            None => s.sweep_levels.clone(),
        };
        Ok((s, levels))
    }

    fn apply_run_flags(&mut self, args: &RunArgs) -> Result<(), CliError> {
        if let Some(series) = &args.series {
            self.source = match series.as_str() {
                "mackey-glass" | "mg" => SourceKind::MackeyGlass,
                "file" => SourceKind::File,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown series source {other:?}; expected mackey-glass or file"
                    )));
                }
            };
        }
        if let Some(path) = &args.path {
            self.path = Some(path.clone());
        }
        if let Some(train) = args.train {
            self.train = Some(train);
        }
        if let Some(test) = args.test {
            self.test = test;
        }
        if let Some(runs) = args.runs {
            self.runs = runs;
        }
        if let Some(list) = &args.algos {
            self.algos = Some(parse_algo_list(list)?);
        }
        if let Some(noise) = args.noise {
            if !noise.is_finite() || noise < 0.0 {
                return Err(CliError::Config(format!(
                    "noise {noise} must be nonnegative"
                )));
            }
            self.noise_std = noise;
        }
        if let Some(gamma) = &args.gamma {
            let spec = parse_gamma("gamma", gamma, 0)?;
            self.set_all_gammas(spec);
        }
        if let Some(seed) = args.seed {
            self.seed = seed;
        }
        if let Some(out) = &args.out {
            self.out_dir = Some(out.clone());
        }
        Ok(())
    }

    fn set_all_gammas(&mut self, spec: GammaSpec) {
        for id in AlgorithmId::ALL {
            self.params.get_mut(id).gamma = spec;
        }
    }

    pub fn apply_file(&mut self, path: &PathBuf) -> Result<(), CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Runtime(format!("cannot read config file {}: {e}", path.display()))
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "line {line}: expected `key = value`, got {content:?}"
                ))
            })?;
            self.apply_key(key.trim(), value.trim(), line)?;
        }
        Ok(())
    }

    fn apply_key(&mut self, key: &str, value: &str, line: usize) -> Result<(), CliError> {
        match key {
            "series.source" => {
                self.source = match value {
                    "mackey-glass" | "mg" => SourceKind::MackeyGlass,
                    "file" => SourceKind::File,
                    other => {
                        return Err(CliError::Config(format!(
                            "line {line}: unknown series source {other:?}"
                        )));
                    }
                };
            }
            "series.path" => self.path = Some(PathBuf::from(value)),
            "series.noise_std" => self.noise_std = parse_value(key, value, line)?,
            "series.seed" => self.seed = parse_value(key, value, line)?,
            "series.length" => self.length = parse_value(key, value, line)?,
            "mg.tau" => self.mg.tau = parse_value(key, value, line)?,
            "mg.beta" => self.mg.beta = parse_value(key, value, line)?,
            "mg.decay" => self.mg.decay = parse_value(key, value, line)?,
            "mg.exponent" => self.mg.exponent = parse_value(key, value, line)?,
            "mg.dt" => self.mg.dt = parse_value(key, value, line)?,
            "mg.sample_every" => self.mg.sample_every = parse_value(key, value, line)?,
            "mg.washout" => self.mg.washout = parse_value(key, value, line)?,
            "embed.window" => self.embed_window = parse_value(key, value, line)?,
            "embed.horizon" => self.horizon = parse_value(key, value, line)?,
            "run.train" => self.train = Some(parse_value(key, value, line)?),
            "run.test" => self.test = parse_value(key, value, line)?,
            "run.runs" => self.runs = parse_value(key, value, line)?,
            "run.algos" => self.algos = Some(parse_algo_list(value)?),
            "sweep.levels" => self.sweep_levels = parse_noise_list(value)?,
            "kernel.bandwidth" => self.params.kernel.bandwidth = parse_value(key, value, line)?,
            "kernel.exponent" => {
                self.params.kernel.exponent = match value {
                    "bandwidth" => GaussianExponent::Bandwidth,
                    "scale" => GaussianExponent::Scale,
                    other => {
                        return Err(CliError::Config(format!(
                            "line {line}: kernel.exponent must be `bandwidth` or `scale`, got {other:?}"
                        )));
                    }
                };
            }
            "filter.gamma" => {
                let spec = parse_gamma(key, value, line)?;
                self.set_all_gammas(spec);
            }
            "filter.window" => {
                let window = parse_value(key, value, line)?;
                for id in AlgorithmId::ALL {
                    self.params.get_mut(id).window = window;
                }
            }
            "filter.epsilon" => {
                let epsilon = parse_value(key, value, line)?;
                for id in AlgorithmId::ALL {
                    self.params.get_mut(id).epsilon = epsilon;
                }
            }
            "out.dir" => self.out_dir = Some(PathBuf::from(value)),
            other => self.apply_algo_key(other, value, line)?,
        }
        Ok(())
    }

    /// `<algo>.<field>` keys: e.g. `klms.step = 0.05`, `sm-kap.epsilon = 0.1`.
    fn apply_algo_key(&mut self, key: &str, value: &str, line: usize) -> Result<(), CliError> {
        let unknown = || CliError::Config(format!("line {line}: unknown config key {key:?}"));
        let (algo, field) = key.rsplit_once('.').ok_or_else(unknown)?;
        let id: AlgorithmId = algo.parse().map_err(|_| unknown())?;
        let params = self.params.get_mut(id);
        match field {
            "step" => params.step_size = parse_value(key, value, line)?,
            "gamma" => params.gamma = parse_gamma(key, value, line)?,
            "window" => params.window = parse_value(key, value, line)?,
            "epsilon" => params.epsilon = parse_value(key, value, line)?,
            _ => return Err(unknown()),
        }
        Ok(())
    }

    /// Final experiment description for this verb's algorithm roster.
    pub fn experiment_config(
        &self,
        default_algos: &[AlgorithmId],
    ) -> Result<ExperimentConfig, CliError> {
        let source = match self.source {
            SourceKind::MackeyGlass => SeriesSource::MackeyGlass(self.mg),
            SourceKind::File => {
                let path = self.path.clone().ok_or_else(|| {
                    CliError::Config(
                        "series source `file` needs a path (--path or series.path)".into(),
                    )
                })?;
                SeriesSource::File(path)
            }
        };
        let train = self.train.unwrap_or(match self.source {
            SourceKind::MackeyGlass => 1500,
            SourceKind::File => 3500,
        });
        let algorithms = self.algos.clone().unwrap_or_else(|| default_algos.to_vec());
        Ok(ExperimentConfig {
            algorithms,
            series: SeriesConfig {
                source,
                length: self.length,
                noise_std: self.noise_std,
                seed: self.seed,
            },
            embed_window: self.embed_window,
            horizon: self.horizon,
            train_count: train,
            test_count: self.test,
            runs: self.runs,
            params: self.params,
        })
    }

    /// Output directory: flag/config, then $KAF_OUT_DIR, then the cwd.
    pub fn resolve_out_dir(&self) -> PathBuf {
        if let Some(dir) = &self.out_dir {
            return dir.clone();
        }
        if let Some(env) = std::env::var_os("KAF_OUT_DIR") {
            if !env.is_empty() {
                return PathBuf::from(env);
            }
        }
        PathBuf::from(".")
    }
}
