use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance is not symmetric positive semidefinite: {0}")]
    NotPsd(String),

    #[error("Lévy measure is not integrable: {0}")]
    NonIntegrable(String),

    #[error("measure has infinite logarithmic moment; the half-line mapping is undefined")]
    InfiniteLogMoment,

    #[error("half-line integral does not converge: {0}")]
    Divergent(String),

    #[error("quadrature failed to reach tolerance: estimate {estimate:.3e} after {intervals} intervals")]
    Quadrature { estimate: f64, intervals: usize },

    #[error("transform leaves the closed term family: {0}")]
    UnsupportedTransform(String),

    #[error("simulation resolution: {0}")]
    Resolution(String),

    #[error("internal consistency check failed: {what} (sup-norm gap {gap:.3e})")]
    Consistency { what: String, gap: f64 },

    #[error("empty sample batch")]
    EmptyBatch,

    #[error("unknown distribution family `{0}`")]
    UnknownFamily(String),

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
