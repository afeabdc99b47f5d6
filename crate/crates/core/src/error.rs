//! Crate-wide error type.

use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or configuration parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The offspring mean matrix has spectral radius >= 1 (within margin).
    #[error("model is not stable: spectral radius {rho} exceeds 1 - {margin}")]
    Unstable { rho: f64, margin: f64 },

    /// Spectral-radius iteration did not converge.
    #[error("spectral radius iteration did not converge after {0} iterations")]
    NonConvergence(usize),

    /// No type has a nondegenerate conditional variance; nothing to monitor.
    #[error("reduction set is empty: every type is deterministic given the past")]
    EmptyReduction,

    /// The Gram matrix of the regression is singular or too ill-conditioned.
    /// Signals a violation of the model assumptions that guarantee estimator
    /// existence (a type dying out or a degenerate linear combination).
    #[error("singular Gram matrix (condition estimate {condition:.3e})")]
    SingularGram { condition: f64 },

    /// Not enough observations for the requested estimation.
    #[error("insufficient data: need at least {needed} training steps, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// A residual/monitoring range lies outside the trajectory.
    #[error("range error: {0}")]
    RangeError(String),

    /// A covariance matrix is not positive definite; whitening is impossible
    /// without reducing to the nondegenerate components.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// The critical-value table does not cover the requested parameters.
    #[error("critical-value table miss: {0}")]
    TableMiss(String),

    /// Cached table was written by an incompatible format version.
    #[error("table format version mismatch: file has {found}, expected {expected}")]
    FormatVersionMismatch { found: u32, expected: u32 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    /// Malformed trajectory or table file contents.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
