//! Linear baseline filters: LMS, NLMS, SM-NLMS, APA and SM-APA.
//!
//! These exist as comparison rows for the kernel filters and follow the
//! standard update rules. The set-membership variants share the kernel
//! filters' gate: adapt only when the prior error magnitude exceeds the
//! bound γ, with data-selective step 1 − γ/|e|.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::filter::{OnlineFilter, UpdateOutcome};
use crate::kernel::{regularized_solve, GramMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinearAlgorithm {
    Lms,
    Nlms,
    SmNlms,
    Apa,
    SmApa,
}

impl LinearAlgorithm {
    fn is_set_membership(self) -> bool {
        matches!(self, LinearAlgorithm::SmNlms | LinearAlgorithm::SmApa)
    }

    fn uses_window(self) -> bool {
        matches!(self, LinearAlgorithm::Apa | LinearAlgorithm::SmApa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConfig {
    pub algorithm: LinearAlgorithm,
    /// Input vector length N; fixed for the filter's lifetime.
    pub input_dim: usize,
    /// Step size μ for LMS/NLMS/APA. Ignored by the set-membership variants.
    pub step_size: f64,
    /// Error bound γ for the set-membership variants.
    pub gamma: f64,
    /// Affine-projection window K.
    pub window: usize,
    /// Regularizer ε in normalizations and Gram solves.
    pub epsilon: f64,
}

impl LinearConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidConfig("input_dim must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window K must be at least 1".into()));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.algorithm.is_set_membership() {
            if !self.gamma.is_finite() || self.gamma < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "gamma must be nonnegative, got {}",
                    self.gamma
                )));
            }
        } else if !self.step_size.is_finite() || self.step_size <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        Ok(())
    }
}

/// Weight-vector filter over fixed-length inputs. Affine-projection variants
/// keep the last K (input, desired) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFilter {
    cfg: LinearConfig,
    weights: Vec<f64>,
    history: VecDeque<(Vec<f64>, f64)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearFilter {
    /// Fresh filter with zero weights.
    pub fn new(cfg: LinearConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(LinearFilter {
            weights: vec![0.0; cfg.input_dim],
            history: VecDeque::with_capacity(if cfg.algorithm.uses_window() {
                cfg.window
            } else {
                0
            }),
            cfg,
        })
    }

    pub fn config(&self) -> &LinearConfig {
        &self.cfg
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.cfg.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.cfg.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn outcome(&self, prediction: f64, e: f64, step: f64, updated: bool) -> UpdateOutcome {
        UpdateOutcome {
            prediction,
            prior_error: e,
            step_used: step,
            updated,
            grew: false,
            dictionary_size: 0,
        }
    }

    fn scaled_add(&mut self, scale: f64, x: &[f64]) {
        for (w, xi) in self.weights.iter_mut().zip(x) {
            *w += scale * xi;
        }
    }

    fn push_window(&mut self, x: &[f64], d: f64) {
        self.history.push_front((x.to_vec(), d));
        self.history.truncate(self.cfg.window);
    }

    /// w += scale · X·v, with X's columns the window inputs newest-first.
    fn window_scaled_add(&mut self, scale: f64, v: &[f64]) {
        for (col, (x, _)) in self.history.iter().enumerate() {
            let s = scale * v[col];
            for (w, xi) in self.weights.iter_mut().zip(x) {
                *w += s * xi;
            }
        }
    }

    /// XᵀX over the current window plus the a-priori error of each member
    /// under the present weights (current sample first).
    fn window_system(&self) -> (GramMatrix, Vec<f64>) {
        let m = self.history.len();
        let xtx =
            GramMatrix::from_symmetric_fn(m, |j, l| dot(&self.history[j].0, &self.history[l].0));
        let errs = self
            .history
            .iter()
            .map(|(x, d)| d - dot(&self.weights, x))
            .collect();
        (xtx, errs)
    }
}

impl OnlineFilter for LinearFilter {
    fn input_dim(&self) -> usize {
        self.cfg.input_dim
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(dot(&self.weights, x))
    }

    fn update(&mut self, x: &[f64], d: f64) -> Result<UpdateOutcome> {
        self.check_dim(x)?;
        let prediction = dot(&self.weights, x);
        let e = d - prediction;

        match self.cfg.algorithm {
            LinearAlgorithm::Lms => {
                let mu = self.cfg.step_size;
                self.scaled_add(mu * e, x);
                Ok(self.outcome(prediction, e, mu, true))
            }
            LinearAlgorithm::Nlms => {
                let denom = self.cfg.epsilon + dot(x, x);
                if denom == 0.0 {
                    return Ok(self.outcome(prediction, e, 0.0, false));
                }
                let mu = self.cfg.step_size;
                self.scaled_add(mu * e / denom, x);
                Ok(self.outcome(prediction, e, mu, true))
            }
            LinearAlgorithm::SmNlms => {
                if e.abs() <= self.cfg.gamma {
                    return Ok(self.outcome(prediction, e, 0.0, false));
                }
                let denom = self.cfg.epsilon + dot(x, x);
                if denom == 0.0 {
                    return Ok(self.outcome(prediction, e, 0.0, false));
                }
                let mu = 1.0 - self.cfg.gamma / e.abs();
                self.scaled_add(mu * e / denom, x);
                Ok(self.outcome(prediction, e, mu, true))
            }
            LinearAlgorithm::Apa => {
                self.push_window(x, d);
                let (xtx, errs) = self.window_system();
                let v = regularized_solve(&xtx, &errs, self.cfg.epsilon)?;
                let mu = self.cfg.step_size;
                self.window_scaled_add(mu, &v);
                Ok(self.outcome(prediction, e, mu, true))
            }
            LinearAlgorithm::SmApa => {
                // Gated steps leave the whole state alone, window included;
                // the window holds only inputs that fired an update.
                if e.abs() <= self.cfg.gamma {
                    return Ok(self.outcome(prediction, e, 0.0, false));
                }
                self.push_window(x, d);
                let m = self.history.len();
                let xtx = GramMatrix::from_symmetric_fn(m, |j, l| {
                    dot(&self.history[j].0, &self.history[l].0)
                });
                let mut u = vec![0.0; m];
                u[0] = 1.0;
                let v = regularized_solve(&xtx, &u, self.cfg.epsilon)?;
                let eta = 1.0 - self.cfg.gamma / e.abs();
                self.window_scaled_add(eta * e, &v);
                Ok(self.outcome(prediction, e, eta, true))
            }
        }
    }

    fn dictionary_size(&self) -> usize {
        0
    }
}
