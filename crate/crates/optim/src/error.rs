use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("numerical failure in simplex: {0}")]
    NumericalFailure(String),
    #[error("iteration limit of {0} simplex iterations reached")]
    IterationLimit(usize),
    #[error("mixed-integer program is infeasible")]
    Infeasible,
    #[error("branch-and-bound node limit {limit} reached (incumbent {incumbent:?}, bound {bound})")]
    BudgetExceeded {
        limit: usize,
        incumbent: Option<f64>,
        bound: f64,
    },
}
