use thiserror::Error;

/// Errors raised by builders and operator algebra.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("slot {slot} out of range for {factors} factors")]
    SlotOutOfRange { slot: usize, factors: usize },
    #[error("operator needs at least two tensor factors")]
    TooFewFactors,
    #[error("reference operator is numerically zero")]
    ZeroReference,
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("missing input: {0}")]
    Missing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
