//! Best-bound branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::OptimError;
use crate::lp::{solve_lp, solve_lp_warm, Basis, LinearProgram, LpStatus};

#[derive(Debug, Clone)]
pub struct MixedIntegerProgram {
    pub lp: LinearProgram,
    pub binaries: Vec<usize>,
}

impl MixedIntegerProgram {
    pub fn new(lp: LinearProgram, binaries: Vec<usize>) -> Self {
        MixedIntegerProgram { lp, binaries }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        self.lp.validate()?;
        let n = self.lp.num_vars();
        if let Some(&j) = self.binaries.iter().find(|&&j| j >= n) {
            return Err(OptimError::Malformed(format!("binary index {j} out of range {n}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MilpOptions {
    pub rel_gap: f64,
    pub node_limit: usize,
    pub int_tol: f64,
    /// Run the heuristic callback every this many nodes (root always).
    pub heuristic_every: usize,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions { rel_gap: 1e-4, node_limit: 200_000, int_tol: 1e-6, heuristic_every: 50 }
    }
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Upper bound on the optimum proven by the search.
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
}

/// Relative gap between a bound and an incumbent for a maximization problem.
pub fn relative_gap(bound: f64, incumbent: f64) -> f64 {
    let diff = (bound - incumbent).max(0.0);
    if diff <= 1e-12 {
        0.0
    } else {
        diff / incumbent.abs().max(1e-9)
    }
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    fixes: Vec<(usize, f64)>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

pub fn solve_milp(mip: &MixedIntegerProgram, rel_gap: f64) -> Result<MilpSolution, OptimError> {
    let opts = MilpOptions { rel_gap, ..MilpOptions::default() };
    solve_milp_with(mip, &opts, None)
}

/// Heuristic callback: given a relaxation solution, propose a full candidate
/// vector. Candidates are checked for feasibility and integrality before use.
pub type Heuristic<'a> = &'a (dyn Fn(&[f64]) -> Option<Vec<f64>> + Sync);

pub fn solve_milp_with(
    mip: &MixedIntegerProgram,
    opts: &MilpOptions,
    heuristic: Option<Heuristic<'_>>,
) -> Result<MilpSolution, OptimError> {
    mip.validate()?;
    if opts.rel_gap <= 0.0 {
        return Err(OptimError::Malformed("relative gap must be positive".into()));
    }
    let mut lp = mip.lp.clone();
    let base_bounds: Vec<(usize, f64, f64)> = mip
        .binaries
        .iter()
        .map(|&j| {
            let (lo, hi) = lp.bounds(j);
            (j, lo.max(0.0).ceil(), hi.min(1.0).floor())
        })
        .collect();
    let apply = |lp: &mut LinearProgram, fixes: &[(usize, f64)]| {
        for &(j, lo, hi) in &base_bounds {
            lp.set_bounds(j, lo, hi);
        }
        for &(j, v) in fixes {
            lp.set_bounds(j, v, v);
        }
    };

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut nodes = 0usize;
    let mut lp_iterations = 0usize;
    let mut next_id = 1usize;
    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: f64::INFINITY, depth: 0, id: 0, fixes: Vec::new(), basis: None });

    let accept = |cand: &[f64], lp: &LinearProgram, incumbent: &mut Option<(Vec<f64>, f64)>| {
        let mut x = cand.to_vec();
        for &j in &mip.binaries {
            if (x[j] - x[j].round()).abs() > opts.int_tol {
                return;
            }
            x[j] = x[j].round();
        }
        if !crate::lp::primal_feasible(lp, &x) {
            return;
        }
        let val = lp.evaluate(&x);
        if incumbent.as_ref().is_none_or(|(_, v)| val > *v) {
            *incumbent = Some((x, val));
        }
    };

    let mut best_bound;
    loop {
        let Some(node) = heap.pop() else {
            best_bound = incumbent.as_ref().map_or(f64::NEG_INFINITY, |(_, v)| *v);
            break;
        };
        best_bound = node.bound;
        if let Some((_, inc)) = &incumbent {
            if relative_gap(node.bound, *inc) <= opts.rel_gap {
                break;
            }
        }
        if nodes >= opts.node_limit {
            heap.push(node);
            let bound = heap.iter().map(|n| n.bound).fold(f64::NEG_INFINITY, f64::max);
            return Err(OptimError::BudgetExceeded {
                limit: opts.node_limit,
                incumbent: incumbent.map(|(_, v)| v),
                bound,
            });
        }
        nodes += 1;
        apply(&mut lp, &node.fixes);
        let sol = match &node.basis {
            Some(b) => solve_lp_warm(&lp, b)?,
            None => solve_lp(&lp)?,
        };
        lp_iterations += sol.iterations;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(OptimError::NumericalFailure("unbounded relaxation".into()))
            }
            LpStatus::Optimal => {}
        }
        let bound = sol.objective.min(node.bound);
        if let Some((_, inc)) = &incumbent {
            if relative_gap(bound, *inc) <= opts.rel_gap {
                continue;
            }
        }
        if let Some(h) = heuristic {
            if nodes == 1 || nodes.is_multiple_of(opts.heuristic_every.max(1)) {
                if let Some(cand) = h(&sol.x) {
                    if cand.len() == sol.x.len() {
                        accept(&cand, &mip.lp, &mut incumbent);
                    }
                }
            }
        }
        let mut branch = None;
        let mut worst = opts.int_tol;
        for &j in &mip.binaries {
            let frac = (sol.x[j] - sol.x[j].round()).abs();
            if frac > worst {
                worst = frac;
                branch = Some(j);
            }
        }
        let Some(j) = branch else {
            accept(&sol.x, &mip.lp, &mut incumbent);
            continue;
        };
        for v in [1.0, 0.0] {
            let mut fixes = node.fixes.clone();
            fixes.push((j, v));
            heap.push(Node {
                bound,
                depth: node.depth + 1,
                id: next_id,
                fixes,
                basis: sol.basis.clone(),
            });
            next_id += 1;
        }
    }

    let Some((x, objective)) = incumbent else {
        return Err(OptimError::Infeasible);
    };
    let best_bound = best_bound.max(objective);
    Ok(MilpSolution {
        gap: relative_gap(best_bound, objective),
        x,
        objective,
        best_bound,
        nodes,
        lp_iterations,
    })
}
