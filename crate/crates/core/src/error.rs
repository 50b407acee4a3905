use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field maps are not sampled on the same grid")]
    GridMismatch,

    #[error("field has zero power")]
    ZeroPower,

    #[error("ray at theta = {theta:.6} rad misses the mirror aperture (theta_max = {theta_max:.6} rad)")]
    MissedAperture { theta: f64, theta_max: f64 },

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("incompatible configuration: {0}")]
    Incompatible(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects non-finite or non-positive values.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
