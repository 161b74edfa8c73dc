//! The online-filter interface shared by the linear and kernel families.

use crate::error::Result;

/// Report of one online training step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateOutcome {
    /// Filter output for the input before any state change.
    pub prediction: f64,
    /// Prior error e = d − prediction.
    pub prior_error: f64,
    /// Step size actually applied; 0 when the update was gated. For
    /// set-membership variants this is the data-selective 1 − γ/|e|.
    pub step_used: f64,
    /// Whether the step changed filter state.
    pub updated: bool,
    /// Whether a new center was stored (kernel filters only).
    pub grew: bool,
    /// Stored centers after the step; 0 for linear filters.
    pub dictionary_size: usize,
}

/// One step of an online adaptive filter: predict, then (possibly) adapt.
///
/// Implementations are sequential state machines; distinct instances share
/// nothing and may be driven concurrently.
pub trait OnlineFilter {
    /// Expected input vector length.
    fn input_dim(&self) -> usize;

    /// Filter output for `x` with the current state, no state change.
    fn predict(&self, x: &[f64]) -> Result<f64>;

    /// One online step on the pair (x, d).
    fn update(&mut self, x: &[f64], d: f64) -> Result<UpdateOutcome>;

    /// Number of stored centers; 0 for filters without a dictionary.
    fn dictionary_size(&self) -> usize;
}
