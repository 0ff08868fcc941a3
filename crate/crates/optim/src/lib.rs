//! Numerical engine for the contagion workspace.
//!
//! * [`lp`]: linear programs in the form `max cᵀx` subject to `≤`/`=` rows and
//!   variable bounds, solved by a bounded-variable revised simplex method
//!   (product-form inverse, Harris ratio test, Bland fallback under stalling).
//! * [`milp`]: best-bound branch-and-bound over binary variables, warm-starting
//!   every child from its parent's optimal basis with the dual simplex method.
//! * [`projection`]: exact Euclidean projection onto the scaled simplex.
//! * [`lpfile`]: CPLEX-LP text dump of a [`LinearProgram`] for external cross-checks.

mod error;
pub mod lp;
pub mod lpfile;
pub mod milp;
pub mod projection;
mod simplex;

pub use error::OptimError;
pub use lp::{solve_lp, solve_lp_warm, Basis, LinearProgram, LpSolution, LpStatus, RowKind};
pub use milp::{relative_gap, solve_milp, solve_milp_with, Heuristic, MilpOptions, MilpSolution, MixedIntegerProgram};
pub use projection::project_simplex;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-8;
/// Reduced-cost (optimality) tolerance.
pub const OPT_TOL: f64 = 1e-9;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
