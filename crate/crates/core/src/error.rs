use thiserror::Error;

/// Errors raised by the covariance break machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vech vector of length {len} does not match dimension {dim} (expected {expected})")]
    VechLength { dim: usize, len: usize, expected: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("singular long-run covariance (dimension {dim})")]
    SingularLongRunCovariance { dim: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample too small: {0}")]
    TooFewObservations(String),

    #[error("root bracketing failed for level {level}: {reason}")]
    Bracketing { level: f64, reason: String },

    #[error("model validation failed: {0}")]
    Validation(String),

    #[error("volatility overflow at index {index}")]
    Overflow { index: usize },
}

impl Error {
    /// True for failures that stem from numerics rather than from the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite
                | Error::SingularLongRunCovariance { .. }
                | Error::Bracketing { .. }
                | Error::Overflow { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
