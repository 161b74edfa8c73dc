//! Online adaptive filtering in reproducing-kernel spaces, with the linear
//! baselines and a Monte-Carlo benchmark harness for one-step time-series
//! prediction.
//!
//! The crate is organized around one idea: set-membership updates. A filter
//! adapts only when its prior error magnitude exceeds a bound γ, and then
//! only just enough to bring the a-posteriori error back to ±γ. For kernel
//! filters this gate doubles as a sparsification rule, since a gated step
//! stores no new dictionary center.
//!
//! Modules:
//! - [`kernel`]: Gaussian kernel evaluation, Gram matrices, small regularized
//!   solves.
//! - [`linear`]: LMS, NLMS, SM-NLMS, APA, SM-APA baselines.
//! - [`kernel_filters`]: KLMS, SM-NKLMS, KAPA-2, SM-KAP over a growing
//!   dictionary.
//! - [`timeseries`]: Mackey-Glass generation, series file ingestion, noise
//!   injection, time-window embedding.
//! - [`harness`]: Monte-Carlo experiments, learning curves, final-MSE tables,
//!   dictionary traces, robustness sweeps.

pub mod error;
pub mod filter;
pub mod harness;
pub mod kernel;
pub mod kernel_filters;
pub mod linear;
pub mod timeseries;

pub use error::{Error, Result};
pub use filter::{OnlineFilter, UpdateOutcome};
pub use kernel::{gram, kernel_eval, GaussianExponent, GramMatrix, KernelFamily, KernelSpec};
pub use kernel_filters::{kernel_predict, Dictionary, KernelAlgorithm, KernelConfig, KernelFilter};
pub use linear::{LinearAlgorithm, LinearConfig, LinearFilter};
