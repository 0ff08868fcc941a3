//! Deterministic cash-injection solvers under a fixed network.
//!
//! All programs are posed as maximizations. Variable layouts:
//!
//! * budgeted and Lagrangian LPs: `[p (0..n), c (n..2n)]`
//! * default-weighted MILP: `[p, c, d (2n..3n)]`
//! * all-or-nothing MILP: `[c (0..n), u (n..2n), 1]` where `u_i = 1` means
//!   node `i` pays in full (so `d = 1 − u`); the last variable is fixed at one
//!   and carries the constant `−wᵀp̄`, so the objective is the weighted unpaid
//!   total and branch-and-bound gaps are relative to it

use contagion_optim::{
    solve_lp, solve_milp_with, LinearProgram, LpStatus, MilpOptions, MilpSolution, MixedIntegerProgram,
};
use serde::{Deserialize, Serialize};

use crate::clearing::{all_or_nothing_iteration, check_cash, clear_all_or_nothing, funds, ClearingLp, ClearingMethod};
use crate::error::{Error, Result};
use crate::netmodel::{in_default, ClearingResult, FinancialNetwork, InjectionPlan, SolveMeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum BailoutProblem {
    Problem1 { budget: f64 },
    Problem1Lagrangian { lambda: f64 },
    Problem1Demange { budget: f64, delta: Option<f64> },
    Problem3 { budget: f64 },
    Problem1AllOrNothing { budget: f64, rel_gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BailoutOutcome {
    pub plan: InjectionPlan,
    pub clearing: ClearingResult,
    /// Default indicators, for the mixed-integer variants.
    pub d: Option<Vec<bool>>,
    /// `λ·1ᵀc + W`, for the Lagrangian variant.
    pub total_cost: Option<f64>,
}

impl BailoutProblem {
    pub fn solve(&self, net: &FinancialNetwork) -> Result<BailoutOutcome> {
        let plain = |(plan, clearing): (InjectionPlan, ClearingResult)| BailoutOutcome {
            plan,
            clearing,
            d: None,
            total_cost: None,
        };
        match *self {
            BailoutProblem::Problem1 { budget } => solve_problem1(net, budget).map(plain),
            BailoutProblem::Problem1Lagrangian { lambda } => {
                let (plan, clearing) = solve_problem1_lagrangian(net, lambda)?;
                let cost = lambda * plan.total() + clearing.weighted_unpaid;
                Ok(BailoutOutcome { plan, clearing, d: None, total_cost: Some(cost) })
            }
            BailoutProblem::Problem1Demange { budget, delta } => {
                let delta = delta.unwrap_or_else(|| default_probe(net));
                solve_problem1_demange(net, budget, delta).map(plain)
            }
            BailoutProblem::Problem3 { budget } => {
                let (plan, clearing, d) = solve_problem3(net, budget)?;
                Ok(BailoutOutcome { plan, clearing, d: Some(d), total_cost: None })
            }
            BailoutProblem::Problem1AllOrNothing { budget, rel_gap } => {
                let (plan, clearing, d) = solve_problem1_aon(net, budget, rel_gap)?;
                Ok(BailoutOutcome { plan, clearing, d: Some(d), total_cost: None })
            }
        }
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidParams(format!("budget must be a finite nonnegative number, got {budget}")));
    }
    Ok(())
}

/// Rows `p_i − Σ_k Π_ki p_k − c_i ≤ e_i` for `p` at `0..n`, `c` at `c_off..`.
fn add_clearing_rows(lp: &mut LinearProgram, net: &FinancialNetwork, c_off: usize) {
    for i in 0..net.n() {
        let mut row = vec![(i, 1.0)];
        row.extend(net.borrowers(i).iter().map(|&k| (k, -net.pi(k, i))));
        row.push((c_off + i, -1.0));
        lp.add_le(row, net.e()[i]);
    }
}

/// `max wᵀp` over `[p, c]` with `1ᵀc ≤ budget`.
pub fn problem1_program(net: &FinancialNetwork, weights: &[f64], budget: f64) -> LinearProgram {
    let n = net.n();
    let mut lp = LinearProgram::new(2 * n);
    for i in 0..n {
        lp.set_objective(i, weights[i]);
        lp.set_bounds(i, 0.0, net.pbar()[i]);
    }
    add_clearing_rows(&mut lp, net, n);
    lp.add_le((n..2 * n).map(|j| (j, 1.0)).collect(), budget);
    lp
}

fn optimal(lp: &LinearProgram) -> Result<contagion_optim::LpSolution> {
    let sol = solve_lp(lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!("LP ended {:?}", sol.status)));
    }
    Ok(sol)
}

/// Cash vector from an LP solution, with solver dust removed.
fn cash_from(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| if *v > 1e-12 { *v } else { 0.0 }).collect()
}

pub fn solve_problem1(net: &FinancialNetwork, budget: f64) -> Result<(InjectionPlan, ClearingResult)> {
    check_budget(budget)?;
    let n = net.n();
    let sol = optimal(&problem1_program(net, net.w(), budget))?;
    let c = cash_from(&sol.x[n..]);
    let clearing = ClearingResult::from_payments(net, sol.x[..n].to_vec(), &c, sol.iterations);
    let plan = InjectionPlan {
        objective: clearing.weighted_unpaid,
        c,
        budget,
        meta: SolveMeta::new("problem1_lp", sol.iterations),
    };
    Ok((plan, clearing))
}

/// Total shortfall `Σ (p̄ − p(e))` of the uninjected system.
fn total_shortfall(net: &FinancialNetwork) -> Result<f64> {
    let mut lp = ClearingLp::new(net, net.w());
    Ok(lp.clear(&vec![0.0; net.n()])?.total_unpaid())
}

/// `max wᵀp − λ·1ᵀc`; the chosen total `C* = 1ᵀc` is reported as the plan budget.
pub fn solve_problem1_lagrangian(net: &FinancialNetwork, lambda: f64) -> Result<(InjectionPlan, ClearingResult)> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParams(format!("lambda must be a finite nonnegative number, got {lambda}")));
    }
    let n = net.n();
    let mut lp = LinearProgram::new(2 * n);
    for i in 0..n {
        lp.set_objective(i, net.w()[i]);
        lp.set_bounds(i, 0.0, net.pbar()[i]);
        lp.set_objective(n + i, -lambda);
    }
    add_clearing_rows(&mut lp, net, n);
    let mut notes = Vec::new();
    if lambda == 0.0 {
        let cap = total_shortfall(net)?;
        lp.add_le((n..2 * n).map(|j| (j, 1.0)).collect(), cap);
        notes.push(format!("cash is free at lambda = 0; total injection capped at the shortfall {cap}"));
    }
    let sol = optimal(&lp)?;
    let c = cash_from(&sol.x[n..]);
    let clearing = ClearingResult::from_payments(net, sol.x[..n].to_vec(), &c, sol.iterations);
    let total: f64 = c.iter().sum();
    let mut meta = SolveMeta::new("problem1_lagrangian_lp", sol.iterations);
    meta.notes = notes;
    let plan = InjectionPlan { objective: lambda * total + clearing.weighted_unpaid, c, budget: total, meta };
    Ok((plan, clearing))
}

/// Probe size used when none is given: `1e-6 · max p̄`.
pub fn default_probe(net: &FinancialNetwork) -> f64 {
    let m = net.pbar().iter().cloned().fold(0.0, f64::max);
    if m > 0.0 {
        1e-6 * m
    } else {
        1e-6
    }
}

/// Threat-index policy: repeatedly push cash into the node whose marginal
/// cash value is largest, as far as the first rescue along that direction.
pub fn solve_problem1_demange(
    net: &FinancialNetwork,
    budget: f64,
    delta: f64,
) -> Result<(InjectionPlan, ClearingResult)> {
    check_budget(budget)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParams(format!("probe size must be positive, got {delta}")));
    }
    let n = net.n();
    let pbar = net.pbar();
    let mut lp = ClearingLp::new(net, net.w());
    let mut c = vec![0.0; n];
    let mut remaining = budget;
    let mut meta = SolveMeta::new("problem1_demange", 0);
    let max_iters = 2 * n + 5;
    let spent_out = |r: f64| r <= 1e-12 * budget.max(1.0);
    loop {
        if spent_out(remaining) {
            break;
        }
        if meta.iterations >= max_iters {
            meta.converged = false;
            meta.notes.push(format!("stopped after {max_iters} iterations with {remaining} unspent"));
            break;
        }
        meta.iterations += 1;
        let sol = lp.solve(&funds(net, &c))?;
        let p = sol.x.clone();
        let defaulting: Vec<usize> = (0..n).filter(|&i| in_default(pbar[i], p[i])).collect();
        if defaulting.is_empty() {
            break;
        }
        // largest threat index, lowest index on ties; cash at a solvent node
        // leaves every payment unchanged, whatever the dual says at a kink
        let mut i0 = defaulting[0];
        for &i in &defaulting[1..] {
            if sol.duals[i] > sol.duals[i0] {
                i0 = i;
            }
        }
        if sol.duals[i0] <= 1e-12 {
            meta.converged = false;
            meta.notes.push("no node has a positive threat index".into());
            break;
        }
        let mut d = delta.min(remaining);
        let mut step = None;
        for _ in 0..60 {
            let mut probe = c.clone();
            probe[i0] += d;
            let p2 = lp.solve(&funds(net, &probe))?.x;
            if defaulting.iter().any(|&i| !in_default(pbar[i], p2[i])) && d < remaining {
                d *= 0.5;
                continue;
            }
            let mut ratio = f64::INFINITY;
            for &i in &defaulting {
                let dp = p2[i] - p[i];
                if dp > 1e-9 * d {
                    ratio = ratio.min((pbar[i] - p[i]) / dp);
                }
            }
            step = Some(if ratio.is_finite() { remaining.min(d * ratio) } else { f64::NAN });
            break;
        }
        match step {
            Some(s) if s.is_finite() && s > 0.0 => {
                c[i0] += s;
                remaining -= s;
            }
            _ => {
                meta.converged = false;
                meta.notes.push(format!("probe at node {i0} moved no defaulting payment; {remaining} left unspent"));
                break;
            }
        }
    }
    let clearing = lp.clear(&c)?;
    let plan = InjectionPlan { objective: clearing.weighted_unpaid, c, budget, meta };
    Ok((plan, clearing))
}

/// Default-weighted program over `[p, c, d]`: `max wᵀp − sᵀd`.
pub fn problem3_program(net: &FinancialNetwork, budget: f64) -> MixedIntegerProgram {
    let n = net.n();
    let mut lp = LinearProgram::new(3 * n);
    for i in 0..n {
        lp.set_objective(i, net.w()[i]);
        lp.set_bounds(i, 0.0, net.pbar()[i]);
        lp.set_objective(2 * n + i, -net.s()[i]);
        let hi = if net.pbar()[i] > 0.0 { 1.0 } else { 0.0 };
        lp.set_bounds(2 * n + i, 0.0, hi);
    }
    add_clearing_rows(&mut lp, net, n);
    for i in 0..n {
        let pb = net.pbar()[i];
        if pb > 0.0 {
            lp.add_le(vec![(i, -1.0), (2 * n + i, -pb)], -pb);
        }
    }
    lp.add_le((n..2 * n).map(|j| (j, 1.0)).collect(), budget);
    MixedIntegerProgram::new(lp, (2 * n..3 * n).collect())
}

/// Minimizes `wᵀ(p̄ − p) + sᵀd`; the plan objective is that `D`.
pub fn solve_problem3(net: &FinancialNetwork, budget: f64) -> Result<(InjectionPlan, ClearingResult, Vec<bool>)> {
    check_budget(budget)?;
    let n = net.n();
    let mip = problem3_program(net, budget);
    // complete a relaxation by clearing with its cash and reading off defaults
    let heuristic = |x: &[f64]| -> Option<Vec<f64>> {
        let c = cash_from(&x[n..2 * n]);
        let mut lp = ClearingLp::new(net, net.w());
        let p = lp.clear(&c).ok()?.p;
        let mut cand = p.clone();
        cand.extend_from_slice(&c);
        cand.extend((0..n).map(|i| if net.pbar()[i] - p[i] > 1e-9 * (1.0 + net.pbar()[i]) { 1.0 } else { 0.0 }));
        Some(cand)
    };
    let opts = MilpOptions { rel_gap: 1e-9, ..MilpOptions::default() };
    let sol = solve_milp_with(&mip, &opts, Some(&heuristic))?;
    let c = cash_from(&sol.x[n..2 * n]);
    let d: Vec<bool> = (0..n).map(|i| sol.x[2 * n + i] > 0.5).collect();
    let clearing = ClearingResult::from_payments(net, sol.x[..n].to_vec(), &c, sol.nodes);
    let total_w: f64 = net.w().iter().zip(net.pbar()).map(|(w, p)| w * p).sum();
    let plan = InjectionPlan { objective: total_w - sol.objective, c, budget, meta: milp_meta("problem3_milp", &sol) };
    Ok((plan, clearing, d))
}

fn milp_meta(name: &str, sol: &MilpSolution) -> SolveMeta {
    let mut meta = SolveMeta::new(name, sol.nodes);
    meta.gap = Some(sol.gap);
    meta.notes.push(format!("bound {}, {} LP iterations", sol.best_bound, sol.lp_iterations));
    meta
}

/// All-or-nothing program over `[c, u, 1]`: `max Σ w_i p̄_i u_i − wᵀp̄`
/// subject to `p̄_i u_i − Σ_j L_ji u_j − c_i ≤ e_i`, `1ᵀc ≤ budget`, `u`
/// binary. Nodes that owe nothing have `u_i` fixed to 1. The last variable is
/// fixed at one and carries the constant, so the objective is minus the
/// weighted unpaid liability and relative gaps are measured against it.
pub fn all_or_nothing_program(net: &FinancialNetwork, budget: f64) -> MixedIntegerProgram {
    let n = net.n();
    let pbar = net.pbar();
    let mut lp = LinearProgram::new(2 * n + 1);
    lp.set_objective(2 * n, -net.w().iter().zip(pbar).map(|(w, p)| w * p).sum::<f64>());
    lp.set_bounds(2 * n, 1.0, 1.0);
    for i in 0..n {
        lp.set_objective(n + i, net.w()[i] * pbar[i]);
        let lo = if pbar[i] > 0.0 { 0.0 } else { 1.0 };
        lp.set_bounds(n + i, lo, 1.0);
    }
    for i in 0..n {
        if pbar[i] <= 0.0 {
            continue;
        }
        let mut row = vec![(n + i, pbar[i]), (i, -1.0)];
        row.extend(net.borrowers(i).iter().map(|&j| (n + j, -net.liability(j, i))));
        lp.add_le(row, net.e()[i]);
    }
    lp.add_le((0..n).map(|j| (j, 1.0)).collect(), budget);
    MixedIntegerProgram::new(lp, (n..2 * n).collect())
}

/// Maximizes `wᵀp` under all-or-nothing payments with `1ᵀc ≤ budget`.
pub fn solve_problem1_aon(
    net: &FinancialNetwork,
    budget: f64,
    rel_gap: f64,
) -> Result<(InjectionPlan, ClearingResult, Vec<bool>)> {
    if !(rel_gap > 0.0) {
        return Err(Error::InvalidParams(format!("relative gap must be positive, got {rel_gap}")));
    }
    solve_problem1_aon_with(net, budget, &MilpOptions { rel_gap, ..MilpOptions::default() })
}

pub fn solve_problem1_aon_with(
    net: &FinancialNetwork,
    budget: f64,
    opts: &MilpOptions,
) -> Result<(InjectionPlan, ClearingResult, Vec<bool>)> {
    check_budget(budget)?;
    let n = net.n();
    let mip = all_or_nothing_program(net, budget);
    let heuristic = |x: &[f64]| -> Option<Vec<f64>> {
        let value = |p: &[f64]| -> f64 { p.iter().zip(net.w()).map(|(a, b)| a * b).sum() };
        let mut best = repair_all_or_nothing(net, cash_from(&x[..n]), budget);
        for cut in [0.5, 1e-6] {
            let start: Vec<bool> = (0..n).map(|i| x[n + i] > cut).collect();
            let cand = repair_all_or_nothing(net, prune_paying_set(net, start, budget), budget);
            if value(&cand.1) > value(&best.1) {
                best = cand;
            }
        }
        let (c, p) = best;
        let mut cand = c;
        cand.extend((0..n).map(|i| if net.pbar()[i] <= 0.0 || p[i] > 0.0 { 1.0 } else { 0.0 }));
        cand.push(1.0);
        Some(cand)
    };
    let sol = solve_milp_with(&mip, opts, Some(&heuristic))?;
    let c = cash_from(&sol.x[..n]);
    let p: Vec<f64> = (0..n).map(|i| if sol.x[n + i] > 0.5 { net.pbar()[i] } else { 0.0 }).collect();
    let d = (0..n).map(|i| p[i] < net.pbar()[i]).collect();
    let clearing = ClearingResult::from_payments(net, p, &c, sol.nodes);
    let plan = InjectionPlan {
        objective: clearing.weighted_unpaid,
        c,
        budget,
        meta: milp_meta("problem1_aon_milp", &sol),
    };
    Ok((plan, clearing, d))
}

/// Turns a relaxation's cash into a good all-or-nothing plan. Cash that sits
/// at a defaulting node or exceeds what a solvent node needs is taken back,
/// then the rest of the budget rescues defaulting nodes in decreasing order
/// of `w_i p̄_i / shortfall_i`. Returns the cash and the payments.
fn repair_all_or_nothing(net: &FinancialNetwork, mut c: Vec<f64>, budget: f64) -> (Vec<f64>, Vec<f64>) {
    let n = net.n();
    let pbar = net.pbar();
    for _ in 0..=n {
        let (p, _) = all_or_nothing_iteration(net, &funds(net, &c));
        let inflow = net.inflow(&p);
        for i in 0..n {
            if p[i] < pbar[i] {
                c[i] = 0.0;
            } else {
                let spare = inflow[i] + net.e()[i] + c[i] - pbar[i];
                c[i] -= spare.clamp(0.0, c[i]);
            }
        }
        let remaining = budget - c.iter().sum::<f64>();
        let mut pick: Option<(usize, f64, f64)> = None;
        for i in 0..n {
            if p[i] >= pbar[i] {
                continue;
            }
            let short = pbar[i] - inflow[i] - net.e()[i];
            if short <= 0.0 || short > remaining {
                continue;
            }
            let ratio = net.w()[i] * pbar[i] / short;
            if pick.is_none_or(|(_, r, _)| ratio > r) {
                pick = Some((i, ratio, short));
            }
        }
        match pick {
            Some((i, _, short)) => c[i] += short,
            None => return (c, p),
        }
    }
    let (p, _) = all_or_nothing_iteration(net, &funds(net, &c));
    (c, p)
}

/// Cash that lets every member of `paying` settle in full if the others in
/// the set do, after dropping members (worst value per unit of cash first)
/// until that cash fits the budget.
fn prune_paying_set(net: &FinancialNetwork, mut paying: Vec<bool>, budget: f64) -> Vec<f64> {
    let n = net.n();
    let pbar = net.pbar();
    loop {
        let p: Vec<f64> = (0..n).map(|i| if paying[i] { pbar[i] } else { 0.0 }).collect();
        let inflow = net.inflow(&p);
        let need: Vec<f64> =
            (0..n).map(|i| if paying[i] { (pbar[i] - inflow[i] - net.e()[i]).max(0.0) } else { 0.0 }).collect();
        if need.iter().sum::<f64>() <= budget {
            return need;
        }
        let mut drop: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| need[i] > 0.0) {
            let ratio = net.w()[i] * pbar[i] / need[i];
            if drop.is_none_or(|(_, r)| ratio < r) {
                drop = Some((i, ratio));
            }
        }
        let (i, _) = drop.expect("a positive total need has a positive term");
        paying[i] = false;
    }
}

/// All-or-nothing clearing of `net` with cash `c`, used to check a plan.
pub fn reclear_all_or_nothing(net: &FinancialNetwork, c: &[f64]) -> Result<ClearingResult> {
    check_cash(net, c)?;
    clear_all_or_nothing(net, c, ClearingMethod::fixed_point())
}
