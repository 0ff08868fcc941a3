use contagion_optim::OptimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative entry in {0}")]
    NegativeEntry(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("node {0} owes itself")]
    NonzeroDiagonal(usize),
    #[error("weights must be strictly positive: {0}")]
    NonPositiveWeight(String),
    #[error("payment of node {0} outside [0, p̄]")]
    OutOfRangePayment(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("topology {0} has no closed form")]
    UnsupportedTopology(String),
    #[error("direct solve needs {size} scenario-node pairs, limit is {limit}")]
    SizeGuardExceeded { size: usize, limit: usize },
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

pub type Result<T> = std::result::Result<T, Error>;
