use std::path::PathBuf;

use contagion_core::Error as CoreError;
use contagion_optim::OptimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("solver failure: {0}")]
    Solver(String),
    /// The solver stopped at a limit with nothing feasible to report.
    #[error("no converged result: {0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Solver(_) => 4,
            CliError::NonConvergence(_) => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SolverFailure(_) => CliError::Solver(e.to_string()),
            CoreError::Optim(OptimError::BudgetExceeded { .. }) | CoreError::Optim(OptimError::IterationLimit(_)) => {
                CliError::NonConvergence(e.to_string())
            }
            CoreError::Optim(_) => CliError::Solver(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
