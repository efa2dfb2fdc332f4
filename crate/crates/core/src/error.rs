use thiserror::Error;

/// Failures surfaced by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The speed measure has infinite mass: tail exponent 8/κ ≤ 1.
    #[error("stationary measure is not normalizable for kappa = {kappa} (tail exponent {exponent} <= 1)")]
    NonNormalizable { kappa: f64, exponent: f64 },

    #[error("requested clock value {requested} exceeds simulated range {available}")]
    HorizonExceeded { requested: f64, available: f64 },

    #[error("hypergeometric series diverges at x = {x} for non-terminating parameters")]
    DivergentRegion { x: f64 },

    #[error("pole of {function} at {x}")]
    Pole { function: &'static str, x: f64 },

    #[error("branch {branch} is not applicable here: {reason}")]
    BranchNotApplicable {
        branch: &'static str,
        reason: String,
    },

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e}")]
    QuadratureFailed { a: f64, b: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive, got {value}")))
    }
}
