use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum BlochError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} has modulus {modulus} outside the allowed polydisk")]
    OutsidePolydisk { index: usize, modulus: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("Taylor truncation unavailable for {0}")]
    TruncationUnavailable(String),

    #[error("composition degree {degree} exceeds cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    #[error("derivative unavailable: {0}")]
    DerivativeUnavailable(String),

    #[error("series failed to converge after {terms} terms")]
    NotConverged { terms: usize },

    #[error("self-map is not certified: {0}")]
    Uncertified(String),

    #[error("bad specification: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BlochError>;
