use thiserror::Error;

/// Errors raised by the reconstruction library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: {0}")]
    Size(String),
    #[error("rank {rank} out of range 1..={max}")]
    Rank { rank: usize, max: usize },
    #[error("covariance is not symmetric positive definite: {0}")]
    Covariance(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("problem generation failed after {0} attempts")]
    Generation(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn size_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Size(msg.into()))
}
