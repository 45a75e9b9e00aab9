//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian within tolerance: {0}")]
    NotHermitian(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("degree bound violated: {0}")]
    DegreeBound(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("witness verification failed: {0}")]
    Witness(String),
    #[error("malformed SDPA data: {0}")]
    SdpaFormat(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
