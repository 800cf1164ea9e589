use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian: max |H - H^dagger| = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tensor product dimension {dim} exceeds the limit of {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("time {t} outside the schedule interval [0, {period}]")]
    TimeOutOfRange { t: f64, period: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not supported for this gate kind")]
    Unsupported(&'static str),

    #[error("control segments do not tile the interval: {0}")]
    BadTiling(String),

    #[error("phase undefined: overlap magnitude {overlap:e} below 1e-12")]
    PhaseUndefined { overlap: f64 },

    #[error("target phase {gamma} unreachable; reachable range is [0, {max}]")]
    Unreachable { gamma: f64, max: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
