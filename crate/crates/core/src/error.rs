use thiserror::Error;

/// Errors produced by the string, solver and spectral routines.
#[derive(Debug, Error)]
pub enum KreinError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid string: {0}")]
    InvalidString(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("not representable: {0}")]
    NotRepresentable(String),

    /// A computation did not reach its requested accuracy. `best_estimate`
    /// holds the value obtained so far.
    #[error("accuracy not reached: {message} (best estimate {best_estimate})")]
    Accuracy { message: String, best_estimate: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KreinError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(KreinError::Domain(msg.into()))
}
