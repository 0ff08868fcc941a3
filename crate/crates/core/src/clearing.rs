//! Clearing payment vectors under proportional and all-or-nothing payments.

use contagion_optim::{solve_lp, solve_lp_warm, solve_milp, Basis, LinearProgram, LpSolution, LpStatus};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{ClearingResult, FinancialNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ClearingMethod {
    /// Iterate `p ← min(p̄, Πᵀp + e + c)` from `p̄`, sweeping nodes in place,
    /// until the sup-norm step is below `tol`.
    FixedPoint { tol: f64 },
    FictitiousDefault,
    Lp,
}

impl ClearingMethod {
    pub fn fixed_point() -> Self {
        ClearingMethod::FixedPoint { tol: 1e-10 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClearingMethod::FixedPoint { .. } => "fixed_point",
            ClearingMethod::FictitiousDefault => "fictitious_default",
            ClearingMethod::Lp => "lp",
        }
    }
}

const FIXED_POINT_MAX_ITERS: usize = 10_000_000;

pub(crate) fn check_cash(net: &FinancialNetwork, c: &[f64]) -> Result<()> {
    if c.len() != net.n() {
        return Err(Error::DimensionMismatch(format!("c has {} entries, expected {}", c.len(), net.n())));
    }
    if let Some(i) = c.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::NegativeEntry(format!("c[{i}] = {}", c[i])));
    }
    Ok(())
}

/// `e + c`.
pub fn funds(net: &FinancialNetwork, c: &[f64]) -> Vec<f64> {
    net.e().iter().zip(c).map(|(a, b)| a + b).collect()
}

/// `max weightsᵀp` subject to `0 ≤ p ≤ p̄` and `p − Πᵀp ≤ funds`, one row per
/// node in node order. Row duals are the marginal value of cash at each node.
pub fn clearing_program(net: &FinancialNetwork, funds: &[f64], weights: &[f64]) -> LinearProgram {
    let n = net.n();
    let mut lp = LinearProgram::new(n);
    for i in 0..n {
        lp.set_objective(i, weights[i]);
        lp.set_bounds(i, 0.0, net.pbar()[i]);
    }
    for i in 0..n {
        let mut row = vec![(i, 1.0)];
        row.extend(net.borrowers(i).iter().map(|&k| (k, -net.pi(k, i))));
        lp.add_le(row, funds[i]);
    }
    lp
}

/// Clearing LP kept between solves that differ only in funds or weights,
/// each solve warm-started from the previous optimal basis.
pub struct ClearingLp<'a> {
    net: &'a FinancialNetwork,
    lp: LinearProgram,
    basis: Option<Basis>,
}

impl<'a> ClearingLp<'a> {
    pub fn new(net: &'a FinancialNetwork, weights: &[f64]) -> Self {
        let lp = clearing_program(net, net.e(), weights);
        ClearingLp { net, lp, basis: None }
    }

    pub fn set_weights(&mut self, weights: &[f64]) {
        for (j, &w) in weights.iter().enumerate() {
            self.lp.set_objective(j, w);
        }
    }

    pub fn program(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn solve(&mut self, funds: &[f64]) -> Result<LpSolution> {
        for (r, &f) in funds.iter().enumerate() {
            self.lp.set_rhs(r, f);
        }
        let sol = match &self.basis {
            Some(b) => solve_lp_warm(&self.lp, b)?,
            None => solve_lp(&self.lp)?,
        };
        if sol.status != LpStatus::Optimal {
            return Err(Error::SolverFailure(format!("clearing LP ended {:?}", sol.status)));
        }
        self.basis = sol.basis.clone();
        Ok(sol)
    }

    /// Greatest clearing vector for cash `c` (weights must be positive).
    pub fn clear(&mut self, c: &[f64]) -> Result<ClearingResult> {
        let f = funds(self.net, c);
        let sol = self.solve(&f)?;
        Ok(ClearingResult::from_payments(self.net, sol.x, c, sol.iterations))
    }
}

pub fn clear_proportional(net: &FinancialNetwork, c: &[f64], method: ClearingMethod) -> Result<ClearingResult> {
    check_cash(net, c)?;
    let f = funds(net, c);
    match method {
        ClearingMethod::FixedPoint { tol } => {
            if !(tol > 0.0) {
                return Err(Error::InvalidParams(format!("fixed-point tolerance must be positive, got {tol}")));
            }
            let (p, iters, converged) = fixed_point(net, &f, tol);
            let mut res = ClearingResult::from_payments(net, p, c, iters);
            if !converged {
                res.notes.push(format!("fixed point stopped after {iters} iterations"));
            }
            Ok(res)
        }
        ClearingMethod::FictitiousDefault => fictitious_default(net, c, &f),
        ClearingMethod::Lp => clear_by_lp(net, c, &f),
    }
}

fn fixed_point(net: &FinancialNetwork, f: &[f64], tol: f64) -> (Vec<f64>, usize, bool) {
    let n = net.n();
    let pbar = net.pbar();
    // incoming relative liabilities per creditor, so each sweep can update in place
    let mut start = Vec::with_capacity(n + 1);
    let (mut from, mut weight) = (Vec::new(), Vec::new());
    start.push(0);
    for i in 0..n {
        for &k in net.borrowers(i) {
            from.push(k);
            weight.push(net.pi(k, i));
        }
        start.push(from.len());
    }
    let mut p = pbar.to_vec();
    for k in 1..=FIXED_POINT_MAX_ITERS {
        let mut step: f64 = 0.0;
        for i in 0..n {
            let (a, b) = (start[i], start[i + 1]);
            let inflow = dot_gather(&from[a..b], &weight[a..b], &p);
            let next = pbar[i].min(inflow + f[i]);
            step = step.max((next - p[i]).abs());
            p[i] = next;
        }
        if step < tol {
            return (p, k, true);
        }
    }
    (p, FIXED_POINT_MAX_ITERS, false)
}

/// `Σ w_k p[idx_k]` with four independent partial sums.
fn dot_gather(idx: &[usize], w: &[f64], p: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ic, wc) = (idx.chunks_exact(4), w.chunks_exact(4));
    let (ir, wr) = (ic.remainder(), wc.remainder());
    for (i, w) in ic.zip(wc) {
        for k in 0..4 {
            acc[k] += w[k] * p[i[k]];
        }
    }
    let tail: f64 = ir.iter().zip(wr).map(|(&j, w)| w * p[j]).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn clear_by_lp(net: &FinancialNetwork, c: &[f64], f: &[f64]) -> Result<ClearingResult> {
    let ones = vec![1.0; net.n()];
    let sol = solve_lp(&clearing_program(net, f, &ones))?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!("clearing LP ended {:?}", sol.status)));
    }
    Ok(ClearingResult::from_payments(net, sol.x, c, sol.iterations))
}

fn fictitious_default(net: &FinancialNetwork, c: &[f64], f: &[f64]) -> Result<ClearingResult> {
    let n = net.n();
    let pbar = net.pbar();
    let mut p = pbar.to_vec();
    let mut in_d = vec![false; n];
    let mut size = 0usize;
    for round in 1..=n + 1 {
        let inflow = net.inflow(&p);
        let mut grew = false;
        for i in 0..n {
            let v = inflow[i] + f[i] - pbar[i];
            if !in_d[i] && v < -1e-12 * pbar[i].max(1.0) {
                in_d[i] = true;
                size += 1;
                grew = true;
            }
        }
        if !grew {
            return Ok(ClearingResult::from_payments(net, p, c, round));
        }
        let d: Vec<usize> = (0..n).filter(|&i| in_d[i]).collect();
        let mut pos = vec![usize::MAX; n];
        for (a, &i) in d.iter().enumerate() {
            pos[i] = a;
        }
        let mut a = DMatrix::<f64>::identity(size, size);
        let mut rhs = DVector::<f64>::zeros(size);
        for (row, &i) in d.iter().enumerate() {
            rhs[row] = f[i];
            for &k in net.borrowers(i) {
                if in_d[k] {
                    a[(row, pos[k])] -= net.pi(k, i);
                } else {
                    rhs[row] += net.pi(k, i) * pbar[k];
                }
            }
        }
        let solved = solve_dense(a, rhs);
        match solved {
            Some(x) => {
                for (row, &i) in d.iter().enumerate() {
                    p[i] = x[row];
                }
            }
            None => {
                let mut res = clear_by_lp(net, c, f)?;
                res.notes.push(format!("singular default system in round {round}; solved by LP"));
                return Ok(res);
            }
        }
    }
    Err(Error::SolverFailure("fictitious default did not settle within N rounds".into()))
}

/// Dense LU with partial pivoting; `None` when singular to working precision.
fn solve_dense(a: DMatrix<f64>, rhs: DVector<f64>) -> Option<DVector<f64>> {
    let scale = a.amax().max(1.0);
    let lu = a.lu();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if min_pivot <= 1e-12 * scale {
        return None;
    }
    let x = lu.solve(&rhs)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub fn clear_all_or_nothing(net: &FinancialNetwork, c: &[f64], method: ClearingMethod) -> Result<ClearingResult> {
    check_cash(net, c)?;
    let f = funds(net, c);
    match method {
        ClearingMethod::FixedPoint { .. } | ClearingMethod::FictitiousDefault => {
            let (p, rounds) = all_or_nothing_iteration(net, &f);
            Ok(ClearingResult::from_payments(net, p, c, rounds))
        }
        ClearingMethod::Lp => {
            let shifted = net.with_assets(f)?;
            let mip = crate::bailout::all_or_nothing_program(&shifted, 0.0);
            let sol = solve_milp(&mip, 1e-9)?;
            let n = net.n();
            let p = (0..n).map(|i| if sol.x[n + i] > 0.5 { net.pbar()[i] } else { 0.0 }).collect();
            Ok(ClearingResult::from_payments(net, p, c, sol.nodes))
        }
    }
}

/// Iterates the all-or-nothing map from `p̄`; returns payments and rounds.
pub(crate) fn all_or_nothing_iteration(net: &FinancialNetwork, f: &[f64]) -> (Vec<f64>, usize) {
    let pbar = net.pbar();
    let n = net.n();
    let mut paying = vec![true; n];
    let mut p = pbar.to_vec();
    for round in 1..=n + 1 {
        let inflow = net.inflow(&p);
        let next: Vec<bool> = (0..n).map(|i| inflow[i] + f[i] >= pbar[i] - 1e-9 * (1.0 + pbar[i])).collect();
        if next == paying {
            return (p, round);
        }
        paying = next;
        for i in 0..n {
            p[i] = if paying[i] { pbar[i] } else { 0.0 };
        }
    }
    unreachable!("the paying set only shrinks, so it settles within N rounds")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatIndex {
    pub values: Vec<f64>,
    /// More constraints active than variables at the optimum, so the dual
    /// (and hence the index) may not be unique.
    pub degenerate: bool,
}

/// Marginal decrease of `wᵀ(p̄ − p*)` per unit of cash at each node, read
/// off the duals of the clearing LP.
pub fn threat_index(net: &FinancialNetwork, c: &[f64]) -> Result<ThreatIndex> {
    check_cash(net, c)?;
    let f = funds(net, c);
    let lp = clearing_program(net, &f, net.w());
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!("clearing LP ended {:?}", sol.status)));
    }
    Ok(ThreatIndex { degenerate: is_degenerate(&lp, &sol), values: sol.duals.iter().map(|y| y.max(0.0)).collect() })
}

pub(crate) fn is_degenerate(lp: &LinearProgram, sol: &LpSolution) -> bool {
    let mut active = 0usize;
    for row in lp.rows() {
        if (row.rhs - row.activity(&sol.x)).abs() <= 1e-9 * (1.0 + row.rhs.abs()) {
            active += 1;
        }
    }
    for (j, &x) in sol.x.iter().enumerate() {
        let (lo, hi) = lp.bounds(j);
        if (x - lo).abs() <= 1e-9 * (1.0 + lo.abs()) || (hi - x).abs() <= 1e-9 * (1.0 + hi.abs()) {
            active += 1;
        }
    }
    active > lp.num_vars()
}
