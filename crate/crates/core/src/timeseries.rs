//! Benchmark data: Mackey-Glass generation, series-file ingestion, noise
//! injection and time-window embedding into (input, target) pairs.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Parameters of the Mackey-Glass delay differential equation
/// ds/dt = β·s(t−τ) / (1 + s(t−τ)ⁿ) − γ·s(t), integrated by fixed-step RK4
/// and sampled on a coarser grid.
///
/// The defaults (τ = 30, β = 0.2, γ = 0.1, n = 10, dt = 0.1, one sample per
/// 6 time units, s ≡ 1.2 for t ≤ 0, 1000 washout samples) reproduce the
/// series commonly used in the kernel adaptive filtering literature. All of
/// them are configuration, not constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MackeyGlassParams {
    /// Feedback delay τ, in time units.
    pub tau: f64,
    /// Feedback gain β.
    pub beta: f64,
    /// Linear decay rate γ.
    pub decay: f64,
    /// Nonlinearity exponent n.
    pub exponent: f64,
    /// RK4 integration step.
    pub dt: f64,
    /// Sampling interval, in time units.
    pub sample_every: f64,
    /// Leading samples discarded as transient.
    pub washout: usize,
}

impl Default for MackeyGlassParams {
    fn default() -> Self {
        MackeyGlassParams {
            tau: 30.0,
            beta: 0.2,
            decay: 0.1,
            exponent: 10.0,
            dt: 0.1,
            sample_every: 6.0,
            washout: 1000,
        }
    }
}

impl MackeyGlassParams {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau", self.tau),
            ("beta", self.beta),
            ("decay", self.decay),
            ("exponent", self.exponent),
            ("dt", self.dt),
            ("sample_every", self.sample_every),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "mackey-glass {name} must be finite"
                )));
            }
        }
        if self.dt <= 0.0 || self.tau < self.dt {
            return Err(Error::InvalidConfig(
                "mackey-glass requires dt > 0 and tau ≥ dt".into(),
            ));
        }
        if self.sample_every < self.dt {
            return Err(Error::InvalidConfig(
                "mackey-glass sampling interval must be at least dt".into(),
            ));
        }
        Ok(())
    }
}

const MG_INITIAL: f64 = 1.2;

/// Integrates the Mackey-Glass equation and returns `length` samples after
/// the washout. Deterministic: no randomness enters the dynamics.
///
/// The delayed term is read off the stored fine-grid trajectory; RK4 stage
/// evaluations at half steps interpolate it linearly between grid points.
pub fn generate_mackey_glass(length: usize, params: &MackeyGlassParams) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(Error::InvalidConfig(
            "series length must be positive".into(),
        ));
    }
    params.validate()?;

    let tau_steps = (params.tau / params.dt).round() as usize;
    let stride = (params.sample_every / params.dt).round() as usize;
    let total_samples = params.washout + length;
    let total_steps = (total_samples - 1) * stride;

    let mut values = Vec::with_capacity(total_steps + 1);
    values.push(MG_INITIAL);
    for now in 0..total_steps {
        let y = values[now];
        let delayed = |i: isize| -> f64 {
            if i < 0 {
                MG_INITIAL
            } else {
                values[i as usize]
            }
        };
        let d0 = delayed(now as isize - tau_steps as isize);
        let d1 = delayed(now as isize - tau_steps as isize + 1);
        let dh = 0.5 * (d0 + d1);
        let rate = |s: f64, s_delayed: f64| {
            params.beta * s_delayed / (1.0 + s_delayed.powf(params.exponent)) - params.decay * s
        };
        let k1 = rate(y, d0);
        let k2 = rate(y + 0.5 * params.dt * k1, dh);
        let k3 = rate(y + 0.5 * params.dt * k2, dh);
        let k4 = rate(y + params.dt * k3, d1);
        let next = y + params.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "mackey-glass integration diverged at step {now}"
            )));
        }
        values.push(next);
    }

    Ok((params.washout..total_samples)
        .map(|j| values[j * stride])
        .collect())
}

/// Reads a series file: UTF-8 text, one real value per line, an optional
/// single header line, trailing blank lines tolerated.
pub fn load_series(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading series file {}", path.display()), e))?;
    let mut lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .collect();
    while lines.last().is_some_and(|(_, l)| l.is_empty()) {
        lines.pop();
    }

    let mut values = Vec::with_capacity(lines.len());
    for (pos, (line, content)) in lines.iter().enumerate() {
        match content.parse::<f64>() {
            Ok(v) => values.push(v),
            // the first line may be a header
            Err(_) if pos == 0 && !content.is_empty() => {}
            Err(_) => {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("expected one real value, got {content:?}"),
                });
            }
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("series file holds no values"));
    }
    Ok(values)
}

/// Adds zero-mean Gaussian noise from a seeded generator. A zero deviation
/// returns the input unchanged without touching the generator.
pub fn add_noise(series: &[f64], noise_std: f64, seed: u64) -> Result<Vec<f64>> {
    if !noise_std.is_finite() || noise_std < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "noise_std must be nonnegative, got {noise_std}"
        )));
    }
    if noise_std == 0.0 {
        return Ok(series.to_vec());
    }
    let normal = Normal::new(0.0, noise_std).expect("std validated above");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(series.iter().map(|v| v + normal.sample(&mut rng)).collect())
}

/// Where a benchmark series comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesSource {
    MackeyGlass(MackeyGlassParams),
    File(PathBuf),
}

/// A fully specified noisy series: source, length, noise level and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesConfig {
    pub source: SeriesSource,
    /// Samples to produce for generated sources; 0 lets the harness derive
    /// the minimum needed. For file sources a nonzero value truncates.
    pub length: usize,
    pub noise_std: f64,
    /// Base noise seed; the harness offsets it per Monte-Carlo run.
    pub seed: u64,
}

impl SeriesConfig {
    pub fn mackey_glass(length: usize, noise_std: f64, seed: u64) -> Self {
        SeriesConfig {
            source: SeriesSource::MackeyGlass(MackeyGlassParams::default()),
            length,
            noise_std,
            seed,
        }
    }

    /// The clean series, before noise injection.
    pub fn base_series(&self) -> Result<Vec<f64>> {
        match &self.source {
            SeriesSource::MackeyGlass(params) => generate_mackey_glass(self.length, params),
            SeriesSource::File(path) => {
                let mut series = load_series(path)?;
                if self.length > 0 && series.len() > self.length {
                    series.truncate(self.length);
                }
                Ok(series)
            }
        }
    }

    /// Clean series plus seeded noise.
    pub fn realize(&self) -> Result<Vec<f64>> {
        add_noise(&self.base_series()?, self.noise_std, self.seed)
    }
}

/// Time-window embedding of a scalar series: input j is the window
/// s[j .. j+L), its target is s[j+L−1+horizon]. The first `train_count`
/// pairs train, the next `test_count` are held out.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    train_count: usize,
    test_count: usize,
}

/// Embeds a series with the given window length and prediction horizon.
/// Produces series.len() − window − horizon + 1 pairs; the split starts out
/// as all-train and is narrowed with [`EmbeddedDataset::with_split`].
pub fn embed(series: &[f64], window: usize, horizon: usize) -> Result<EmbeddedDataset> {
    if window == 0 || horizon == 0 {
        return Err(Error::InvalidConfig(
            "embedding window and horizon must be at least 1".into(),
        ));
    }
    if series.len() < window + horizon {
        return Err(Error::InvalidConfig(format!(
            "series of {} samples is too short for window {window} and horizon {horizon}",
            series.len()
        )));
    }
    let count = series.len() - window - horizon + 1;
    let mut inputs = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    for j in 0..count {
        inputs.push(series[j..j + window].to_vec());
        targets.push(series[j + window - 1 + horizon]);
    }
    Ok(EmbeddedDataset {
        inputs,
        targets,
        train_count: count,
        test_count: 0,
    })
}

impl EmbeddedDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn train_count(&self) -> usize {
        self.train_count
    }

    pub fn test_count(&self) -> usize {
        self.test_count
    }

    /// Sequential split: the first `train` pairs train, the next `test` are
    /// held out, so every training target precedes every test target.
    pub fn with_split(mut self, train: usize, test: usize) -> Result<Self> {
        let needed = train
            .checked_add(test)
            .ok_or_else(|| Error::InvalidConfig("split sizes overflow".into()))?;
        if needed > self.len() {
            return Err(Error::InvalidConfig(format!(
                "split {train}+{test} exceeds the {} available pairs",
                self.len()
            )));
        }
        self.train_count = train;
        self.test_count = test;
        Ok(self)
    }

    pub fn train_pairs(&self) -> (&[Vec<f64>], &[f64]) {
        (
            &self.inputs[..self.train_count],
            &self.targets[..self.train_count],
        )
    }

    pub fn test_pairs(&self) -> (&[Vec<f64>], &[f64]) {
        let end = self.train_count + self.test_count;
        (
            &self.inputs[self.train_count..end],
            &self.targets[self.train_count..end],
        )
    }
}
