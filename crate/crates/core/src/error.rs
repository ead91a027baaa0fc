use thiserror::Error;

#[derive(Debug, Error)]
pub enum OslError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("sensor at distance {distance} m overlaps the source (sensor radius {radius} m)")]
    CoincidentSource { distance: f64, radius: f64 },

    #[error("covariance is not positive definite after regularization")]
    SingularCovariance,

    #[error("no admissible direction inside the search volume")]
    NoAdmissibleDirection,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, OslError>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(OslError::InvalidParam {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}
