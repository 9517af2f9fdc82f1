use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the quantity.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or parameter combination is invalid.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Peak-to-average ratio outside the range an operation accepts.
    #[error("alpha = {alpha} outside the admissible range {range}")]
    Regime { alpha: f64, range: &'static str },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("iteration did not converge after {iterations} steps (gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_nonneg(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and >= 0, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {value}")))
    }
}
