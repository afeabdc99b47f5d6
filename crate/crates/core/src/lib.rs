//! Online change-point monitoring for multitype Galton-Watson and GINAR
//! count processes.
//!
//! The library covers the full pipeline:
//!
//! - [`laws`]: offspring/innovation distributions with exact central moments,
//!   and fast sampling of sums of i.i.d. draws;
//! - [`model`]: the p-type model specification, its derived moment matrices,
//!   stability checks and the GINAR(p) embedding;
//! - [`simulate`]: trajectory generation under the null and under a single
//!   change in the dynamics;
//! - [`estimate`]: CLS and WCLS estimation of the moment matrices, residual
//!   series and the covariance estimators used for whitening;
//! - [`detect`]: CUSUM detector statistics, the boundary function and the
//!   online open-end/closed-end monitor;
//! - [`critvals`]: Monte Carlo critical values for weighted Wiener suprema;
//! - [`experiments`]: replicated rejection-rate studies.
//!
//! All stochastic operations take an explicit seedable RNG so that runs are
//! bit-reproducible; see [`rng`] for deterministic per-replicate seeding.

pub mod critvals;
pub mod detect;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod laws;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use laws::Law;
pub use linalg::Matrix;
pub use model::{GinarSpec, ModelSpec, MomentSet};
pub use simulate::Trajectory;
