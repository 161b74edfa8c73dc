//! Online kernel adaptive filters over a growing dictionary: KLMS, SM-NKLMS,
//! KAPA-2 and SM-KAP.
//!
//! All four share the same functional form: the filter is an expansion
//! f(x) = Σₖ aₖ·κ(cₖ, x) over stored centers cₖ. KLMS and KAPA-2 store a new
//! center on every step. The set-membership variants gate on the prior error:
//! when |e| ≤ γ the state is left untouched, otherwise they adapt with the
//! data-selective step 1 − γ/|e|, which pins the a-posteriori error at ±γ
//! (exactly so for ε = 0). In stationary settings the gate closes more and
//! more often, so the dictionary stops growing on its own.
//!
//! Normalization is folded into the stored coefficients: the SM-NKLMS entry
//! for input x is μ·e/(ε + κ(x,x)), so prediction is a plain expansion sum.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::filter::{OnlineFilter, UpdateOutcome};
use crate::kernel::{gram, regularized_solve, GramMatrix, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelAlgorithm {
    Klms,
    SmNklms,
    Kapa2,
    SmKap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub algorithm: KernelAlgorithm,
    pub kernel: KernelSpec,
    /// Step size μ for KLMS/KAPA-2. Ignored by the set-membership variants.
    pub step_size: f64,
    /// Error bound γ (γ̄ for SM-KAP).
    pub gamma: f64,
    /// Affine window K for KAPA-2/SM-KAP.
    pub window: usize,
    /// Regularizer ε in coefficient normalization and Gram solves.
    pub epsilon: f64,
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.window == 0 {
            return Err(Error::InvalidConfig("window K must be at least 1".into()));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gamma must be nonnegative, got {}",
                self.gamma
            )));
        }
        if matches!(
            self.algorithm,
            KernelAlgorithm::Klms | KernelAlgorithm::Kapa2
        ) && (!self.step_size.is_finite() || self.step_size <= 0.0)
        {
            return Err(Error::InvalidConfig(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        Ok(())
    }
}

/// Stored centers with one expansion coefficient each — the entire state of a
/// kernel filter. Length never decreases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dictionary {
    centers: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
}

impl Dictionary {
    pub fn new() -> Self {
        Dictionary::default()
    }

    /// Rebuilds a dictionary from stored centers and coefficients, e.g. a
    /// deserialized snapshot.
    pub fn from_parts(centers: Vec<Vec<f64>>, coefficients: Vec<f64>) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                got: coefficients.len(),
            });
        }
        if let Some(first) = centers.first() {
            for c in &centers {
                if c.len() != first.len() {
                    return Err(Error::DimensionMismatch {
                        expected: first.len(),
                        got: c.len(),
                    });
                }
            }
        }
        Ok(Dictionary {
            centers,
            coefficients,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    fn push(&mut self, center: Vec<f64>, coefficient: f64) {
        self.centers.push(center);
        self.coefficients.push(coefficient);
    }

    /// Expansion sum Σₖ aₖ·κ(cₖ, x); 0 for an empty dictionary.
    pub fn predict(&self, x: &[f64], spec: &KernelSpec) -> Result<f64> {
        if let Some(first) = self.centers.first() {
            if x.len() != first.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    got: x.len(),
                });
            }
        }
        spec.validate()?;
        Ok(self
            .centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, a)| a * spec.eval_unchecked(c, x))
            .sum())
    }
}

/// Evaluates the kernel expansion of `dict` at `x`.
pub fn kernel_predict(dict: &Dictionary, x: &[f64], spec: &KernelSpec) -> Result<f64> {
    dict.predict(x, spec)
}

/// One window member for the affine-projection variants: a recently stored
/// center plus its desired output and a running copy of the filter output for
/// it, folded forward from each step's Gram rows.
#[derive(Debug, Clone, PartialEq)]
struct WindowSlot {
    center: usize,
    desired: f64,
    prediction: f64,
}

/// Online kernel filter. A strictly sequential state machine; independent
/// instances can run concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFilter {
    cfg: KernelConfig,
    input_dim: usize,
    dict: Dictionary,
    /// Most recently stored centers, newest first; capacity K−1. Together
    /// with the current input they form the affine window.
    window: VecDeque<WindowSlot>,
}

impl KernelFilter {
    pub fn new(cfg: KernelConfig, input_dim: usize) -> Result<Self> {
        cfg.validate()?;
        if input_dim == 0 {
            return Err(Error::InvalidConfig("input_dim must be at least 1".into()));
        }
        Ok(KernelFilter {
            cfg,
            input_dim,
            dict: Dictionary::new(),
            window: VecDeque::new(),
        })
    }

    pub fn config(&self) -> &KernelConfig {
        &self.cfg
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn outcome(&self, prediction: f64, e: f64, step: f64, grew: bool) -> UpdateOutcome {
        UpdateOutcome {
            prediction,
            prior_error: e,
            step_used: step,
            updated: grew,
            grew,
            dictionary_size: self.dict.len(),
        }
    }

    /// Gram over the affine window: the current input first, then the stored
    /// window centers newest-first.
    fn window_gram(&self, x: &[f64]) -> Result<GramMatrix> {
        let mut rows: Vec<&[f64]> = Vec::with_capacity(1 + self.window.len());
        rows.push(x);
        for slot in &self.window {
            rows.push(self.dict.centers[slot.center].as_slice());
        }
        gram(&rows, &self.cfg.kernel)
    }

    /// Applies per-member coefficient corrections (current input first, then
    /// window members newest-first), stores x as a new center and slides the
    /// window. Cached member predictions advance using this step's Gram rows.
    fn apply_window_corrections(
        &mut self,
        x: &[f64],
        d: f64,
        prediction: f64,
        corrections: &[f64],
        g: &GramMatrix,
    ) {
        for (j, slot) in self.window.iter_mut().enumerate() {
            let row = j + 1;
            let delta: f64 = corrections
                .iter()
                .enumerate()
                .map(|(m, c)| c * g.get(row, m))
                .sum();
            slot.prediction += delta;
            self.dict.coefficients[slot.center] += corrections[row];
        }
        let own_delta: f64 = corrections
            .iter()
            .enumerate()
            .map(|(m, c)| c * g.get(0, m))
            .sum();
        self.dict.push(x.to_vec(), corrections[0]);
        self.window.push_front(WindowSlot {
            center: self.dict.len() - 1,
            desired: d,
            prediction: prediction + own_delta,
        });
        self.window.truncate(self.cfg.window.saturating_sub(1));
    }
}

impl OnlineFilter for KernelFilter {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.dict.predict(x, &self.cfg.kernel)
    }

    fn update(&mut self, x: &[f64], d: f64) -> Result<UpdateOutcome> {
        self.check_dim(x)?;
        let prediction = self.dict.predict(x, &self.cfg.kernel)?;
        let e = d - prediction;

        match self.cfg.algorithm {
            KernelAlgorithm::Klms => {
                let mu = self.cfg.step_size;
                self.dict.push(x.to_vec(), mu * e);
                Ok(self.outcome(prediction, e, mu, true))
            }
            KernelAlgorithm::SmNklms => {
                if e.abs() <= self.cfg.gamma {
                    return Ok(self.outcome(prediction, e, 0.0, false));
                }
                let mu = 1.0 - self.cfg.gamma / e.abs();
                let self_sim = self.cfg.kernel.eval_unchecked(x, x);
                self.dict
                    .push(x.to_vec(), mu * e / (self.cfg.epsilon + self_sim));
                Ok(self.outcome(prediction, e, mu, true))
            }
            KernelAlgorithm::Kapa2 => {
                let g = self.window_gram(x)?;
                let mut errs = Vec::with_capacity(g.dim());
                errs.push(e);
                for slot in &self.window {
                    errs.push(slot.desired - slot.prediction);
                }
                let solved = regularized_solve(&g, &errs, self.cfg.epsilon)?;
                let mu = self.cfg.step_size;
                let corrections: Vec<f64> = solved.iter().map(|v| mu * v).collect();
                self.apply_window_corrections(x, d, prediction, &corrections, &g);
                Ok(self.outcome(prediction, e, mu, true))
            }
            KernelAlgorithm::SmKap => {
                if e.abs() <= self.cfg.gamma {
                    return Ok(self.outcome(prediction, e, 0.0, false));
                }
                let eta = 1.0 - self.cfg.gamma / e.abs();
                let g = self.window_gram(x)?;
                let mut unit = vec![0.0; g.dim()];
                unit[0] = 1.0;
                let solved = regularized_solve(&g, &unit, self.cfg.epsilon)?;
                let scale = eta * e;
                let corrections: Vec<f64> = solved.iter().map(|v| scale * v).collect();
                self.apply_window_corrections(x, d, prediction, &corrections, &g);
                Ok(self.outcome(prediction, e, eta, true))
            }
        }
    }

    fn dictionary_size(&self) -> usize {
        self.dict.len()
    }
}
