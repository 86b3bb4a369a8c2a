use thiserror::Error;

/// Errors produced by the compute-and-forward library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no integer solution: gcd {gcd} does not divide {lambda}")]
    NoSolution { gcd: i64, lambda: i64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
