//! Borrower–lender network model, clearing payment vectors and the
//! cash-injection solvers built on top of them.

pub mod bailout;
pub mod clearing;
pub mod defaults_min;
pub mod distsim;
mod error;
pub mod generators;
pub mod netmodel;
pub mod stochastic;

pub use error::{Error, Result};
pub use netmodel::{weighted_unpaid, ClearingResult, FinancialNetwork, InjectionPlan, SolveMeta};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
