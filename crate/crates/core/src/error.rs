//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model evaluation, fitting and calibration.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The pump strength reached or exceeded the divergence point.
    #[error("gain diverges: pump strength xi = {xi} must satisfy 0 <= xi < 1")]
    Divergence { xi: f64 },

    /// Invalid input data or configuration.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical procedure failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The requested quantity is undefined on the given range.
    #[error("range error: {0}")]
    Range(String),

    /// Spectra that must share a frequency grid do not.
    #[error("frequency grid mismatch: {0}")]
    GridMismatch(String),

    /// Measured data contradicts the assumed measurement model.
    #[error("inconsistent data: {0}")]
    Inconsistency(String),

    /// Least-squares fit stopped at the iteration limit. Carries the best
    /// parameters found so far.
    #[error(
        "fit did not converge after {iterations} iterations (residual norm {residual_norm:.6e})"
    )]
    FitNonConvergence {
        iterations: usize,
        residual_norm: f64,
        best: Box<crate::linefit::FitResult>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
