//! Linear programs in maximization form.
//!
//! A [`LinearProgram`] is
//!
//! ```text
//! maximize    cᵀx
//! subject to  a_rᵀx ≤ b_r   (Le rows)
//!             a_rᵀx = b_r   (Eq rows)
//!             l ≤ x ≤ u     (bounds may be infinite)
//! ```
//!
//! Row duals `y` are reported so that the reduced costs are `d = c − Aᵀy`;
//! for an optimal solution of a maximization problem every `Le` row has `y ≥ 0`.

use serde::{Deserialize, Serialize};

use crate::error::OptimError;
use crate::simplex::{self, VarState};
use crate::FEAS_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    /// A program with `num_vars` variables, zero objective and bounds `[0, ∞)`.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_vars],
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_objective(&mut self, j: usize, c: f64) {
        self.objective[j] = c;
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn set_rhs(&mut self, r: usize, rhs: f64) {
        self.rows[r].rhs = rhs;
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, kind: RowKind, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, kind, rhs });
        self.rows.len() - 1
    }

    pub fn add_le(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.add_row(coeffs, RowKind::Le, rhs)
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.add_row(coeffs, RowKind::Eq, rhs)
    }

    /// Structural checks. Contradictory bounds are *not* an error here; the
    /// solver reports them as infeasibility.
    pub fn validate(&self) -> Result<(), OptimError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(OptimError::Malformed("bound vectors have wrong length".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(OptimError::Malformed("non-finite objective coefficient".into()));
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(OptimError::Malformed(format!("invalid bounds on variable {j}")));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(OptimError::Malformed(format!("non-finite rhs in row {r}")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(OptimError::Malformed(format!(
                        "row {r} references variable {j} of {n}"
                    )));
                }
                if !a.is_finite() {
                    return Err(OptimError::Malformed(format!("non-finite coefficient in row {r}")));
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let act = row.activity(x);
            let viol = match row.kind {
                RowKind::Le => act - row.rhs,
                RowKind::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn rhs_norm(&self) -> f64 {
        self.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A simplex basis: one state per column of the internal standard form
/// (structural, slack and artificial columns) plus the artificial signs.
/// Used to warm-start a program that differs only in its bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub(crate) states: Vec<VarState>,
    pub(crate) art_sign: Vec<f64>,
}

impl Basis {
    pub fn num_basic(&self) -> usize {
        self.states.iter().filter(|s| **s == VarState::Basic).count()
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual value per row, in row order.
    pub duals: Vec<f64>,
    /// `c − Aᵀy` for the structural variables.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    pub basis: Option<Basis>,
    /// Farkas multipliers (infeasible) or an improving ray (unbounded).
    pub certificate: Option<Vec<f64>>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Objective of the dual program built from the reported row duals and
    /// reduced costs. Equals [`LpSolution::objective`] at optimality.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let mut val: f64 = lp.rows().iter().zip(&self.duals).map(|(r, y)| r.rhs * y).sum();
        for (j, &d) in self.reduced_costs.iter().enumerate() {
            let (lo, hi) = lp.bounds(j);
            let bound = if d > 0.0 { hi } else { lo };
            if bound.is_finite() {
                val += d * bound;
            }
        }
        val
    }

    /// Complementary slackness residual: max over rows of |y_r · slack_r| and
    /// over variables of |d_j · distance to the bound it is priced against|.
    pub fn complementarity_residual(&self, lp: &LinearProgram) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, &y) in lp.rows().iter().zip(&self.duals) {
            if row.kind == RowKind::Le {
                worst = worst.max((y * (row.rhs - row.activity(&self.x))).abs());
            }
        }
        for (j, &d) in self.reduced_costs.iter().enumerate() {
            let (lo, hi) = lp.bounds(j);
            let gap = if d > 0.0 { hi - self.x[j] } else { self.x[j] - lo };
            if gap.is_finite() {
                worst = worst.max((d * gap).abs());
            } else if d.abs() > crate::OPT_TOL {
                worst = f64::INFINITY;
            }
        }
        worst
    }

    /// Primal feasibility residual scaled the way the solver's contract states it.
    pub fn scaled_violation(&self, lp: &LinearProgram) -> f64 {
        lp.max_violation(&self.x) / (1.0 + lp.rhs_norm())
    }
}

/// Solves `lp` from scratch with the two-phase bounded revised simplex method.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, OptimError> {
    lp.validate()?;
    simplex::solve_cold(lp)
}

/// Solves `lp` starting from `basis`, typically the optimal basis of a program
/// with the same rows and slightly different bounds. Falls back to a cold
/// start when the basis cannot be used.
pub fn solve_lp_warm(lp: &LinearProgram, basis: &Basis) -> Result<LpSolution, OptimError> {
    lp.validate()?;
    simplex::solve_warm(lp, basis)
}

pub(crate) fn primal_feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    lp.max_violation(x) <= FEAS_TOL * 10.0 * (1.0 + lp.rhs_norm())
}
