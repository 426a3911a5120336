use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConverged { iterations: usize, residual: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("region leaves the computational domain: {0}")]
    OutOfDomain(String),
    #[error("singular problem: {0}")]
    Singular(String),
    #[error("not enough data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
