//! Heuristics for minimizing the number of defaulting nodes under a cash
//! budget, and the exact default counts for the three stylized topologies.

use contagion_optim::{solve_lp, solve_lp_warm, Basis, LpStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bailout::problem1_program;
use crate::clearing::ClearingLp;
use crate::error::{Error, Result};
use crate::generators::TopologySpec;
use crate::netmodel::{ClearingResult, FinancialNetwork, InjectionPlan, SolveMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReweightConfig {
    pub eps: f64,
    /// Stop once the weights move less than this in ℓ1.
    pub delta: f64,
    /// Random starts in addition to the all-ones start.
    pub random_restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for ReweightConfig {
    fn default() -> Self {
        ReweightConfig { eps: 1e-3, delta: 1e-6, random_restarts: 5, seed: 0, max_iters: 200 }
    }
}

impl ReweightConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !(self.delta > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParams(format!(
                "reweighting needs eps > 0, delta > 0 and at least one iteration: {self:?}"
            )));
        }
        Ok(())
    }

    /// All-ones first, then the random starts: `U(0,1]` scaled to mean one.
    pub fn initial_weights(&self, n: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut starts = vec![vec![1.0; n]];
        for _ in 0..self.random_restarts {
            let mut w: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
            let mean = w.iter().sum::<f64>() / n.max(1) as f64;
            w.iter_mut().for_each(|x| *x /= mean);
            starts.push(w);
        }
        starts
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidParams(format!("budget must be a finite nonnegative number, got {budget}")));
    }
    Ok(())
}

/// `1 / (exp(max(p̄ − p, 0)) − 1 + ε)`, with the exponent capped so the
/// weight stays positive in floating point.
pub fn reweight(pbar: &[f64], p: &[f64], eps: f64) -> Vec<f64> {
    pbar.iter().zip(p).map(|(pb, x)| 1.0 / ((pb - x).clamp(0.0, 700.0).exp() - 1.0 + eps)).collect()
}

/// One reweighting run from `w0`.
#[derive(Debug, Clone)]
pub struct ReweightRun {
    pub plan: InjectionPlan,
    pub clearing: ClearingResult,
    /// Weight vectors used at each iteration, starting with `w0`.
    pub weights: Vec<Vec<f64>>,
}

pub fn reweight_run(net: &FinancialNetwork, budget: f64, w0: Vec<f64>, cfg: &ReweightConfig) -> Result<ReweightRun> {
    let n = net.n();
    let mut lp = problem1_program(net, &w0, budget);
    let mut clear = ClearingLp::new(net, &vec![1.0; n]);
    let mut basis: Option<Basis> = None;
    let mut w = w0;
    let mut history = vec![w.clone()];
    let mut best: Option<(InjectionPlan, ClearingResult)> = None;
    let mut converged = false;
    let mut iters = 0;
    while iters < cfg.max_iters {
        iters += 1;
        for (j, &wj) in w.iter().enumerate() {
            lp.set_objective(j, wj);
        }
        let sol = match &basis {
            Some(b) => solve_lp_warm(&lp, b)?,
            None => solve_lp(&lp)?,
        };
        if sol.status != LpStatus::Optimal {
            return Err(Error::SolverFailure(format!("weighted LP ended {:?}", sol.status)));
        }
        basis = sol.basis.clone();
        // tiny weights fall below the pricing tolerance, so take the true
        // clearing vector for this cash rather than the LP's payments
        let c: Vec<f64> = sol.x[n..].iter().map(|v| v.max(0.0)).collect();
        let cleared = clear.clear(&c)?;
        let next = reweight(net.pbar(), &cleared.p, cfg.eps);
        let moved: f64 = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum();
        if best.as_ref().is_none_or(|(_, r)| cleared.n_defaults < r.n_defaults) {
            let plan = InjectionPlan {
                objective: cleared.n_defaults as f64,
                c,
                budget,
                meta: SolveMeta::new("reweighted_l1", iters),
            };
            best = Some((plan, cleared));
        }
        w = next;
        history.push(w.clone());
        if moved < cfg.delta {
            converged = true;
            break;
        }
    }
    let (mut plan, clearing) = best.expect("at least one iteration runs");
    plan.meta.iterations = iters;
    plan.meta.converged = converged;
    if !converged {
        plan.meta.notes.push(format!("weights still moving after {iters} iterations"));
    }
    Ok(ReweightRun { plan, clearing, weights: history })
}

/// Runs every start (concurrently) and keeps the plan with the fewest
/// defaults, earliest start on ties.
pub fn minimize_defaults_rw(
    net: &FinancialNetwork,
    budget: f64,
    cfg: &ReweightConfig,
) -> Result<(InjectionPlan, ClearingResult)> {
    check_budget(budget)?;
    cfg.validate()?;
    let runs: Vec<Result<ReweightRun>> = cfg
        .initial_weights(net.n())
        .into_par_iter()
        .map(|w0| reweight_run(net, budget, w0, cfg))
        .collect();
    let mut best: Option<(usize, ReweightRun)> = None;
    for (k, run) in runs.into_iter().enumerate() {
        let run = run?;
        if best.as_ref().is_none_or(|(_, b)| run.clearing.n_defaults < b.clearing.n_defaults) {
            best = Some((k, run));
        }
    }
    let (k, run) = best.expect("the all-ones start always runs");
    let mut plan = run.plan;
    plan.meta.notes.push(format!("start {k} of {} kept", cfg.random_restarts + 1));
    Ok((plan, run.clearing))
}

/// Per-iteration record of the greedy allocation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub injected: f64,
    pub recycled: f64,
    pub remaining: f64,
}

pub fn minimize_defaults_greedy(net: &FinancialNetwork, budget: f64) -> Result<(InjectionPlan, ClearingResult)> {
    minimize_defaults_greedy_traced(net, budget).map(|(plan, r, _)| (plan, r))
}

/// Greedy rescue of the cheapest defaulting node, with rescued nodes paying
/// back injected cash out of any surplus they end up with.
pub fn minimize_defaults_greedy_traced(
    net: &FinancialNetwork,
    budget: f64,
) -> Result<(InjectionPlan, ClearingResult, Vec<GreedyStep>)> {
    check_budget(budget)?;
    let n = net.n();
    let mut lp = ClearingLp::new(net, &vec![1.0; n]);
    let mut c = vec![0.0; n];
    let mut remaining = budget;
    let mut steps = Vec::new();
    // recycled cash can circle a cycle of partial rescues, shrinking geometrically
    let empty = 1e-9 * budget.max(1.0);
    let cap = 4 * n + 500;
    let mut meta = SolveMeta::new("greedy", 0);
    loop {
        let r = lp.clear(&c)?;
        let mut recycled = 0.0;
        for i in 0..n {
            let back = r.surplus[i].max(0.0).min(c[i]);
            if back > 0.0 {
                c[i] -= back;
                recycled += back;
            }
        }
        remaining += recycled;
        if remaining <= empty || r.n_defaults == 0 {
            steps.push(GreedyStep { injected: 0.0, recycled, remaining });
            break;
        }
        if meta.iterations >= cap {
            steps.push(GreedyStep { injected: 0.0, recycled, remaining });
            meta.converged = false;
            meta.notes.push(format!("stopped after {cap} iterations"));
            break;
        }
        meta.iterations += 1;
        let k = r
            .defaults
            .iter()
            .copied()
            .min_by(|&a, &b| r.unpaid[a].total_cmp(&r.unpaid[b]).then(a.cmp(&b)))
            .expect("defaults is nonempty");
        let amount = remaining.min(r.unpaid[k]);
        c[k] += amount;
        remaining -= amount;
        steps.push(GreedyStep { injected: amount, recycled, remaining });
    }
    let clearing = lp.clear(&c)?;
    let plan = InjectionPlan { objective: clearing.n_defaults as f64, c, budget, meta };
    Ok((plan, clearing, steps))
}

/// `2^(x−1) − 1`: non-leaf nodes of an `x`-level complete binary tree.
fn tree_internal(x: u32) -> i64 {
    (1i64 << (x - 1)) - 1
}

/// Smallest achievable number of defaults for the stylized topologies.
pub fn oracle_nd(spec: &TopologySpec, budget: f64) -> Result<usize> {
    check_budget(budget)?;
    let nd = match *spec {
        TopologySpec::BinaryTree { levels } => {
            let s = levels;
            if budget < 8.0 {
                tree_internal(s)
            } else if budget >= 2f64.powi(s as i32 + 1) {
                0
            } else {
                let bits = budget.floor() as u64;
                let width = 64 - bits.leading_zeros();
                let saved: i64 = (4..=width).filter(|u| bits >> (u - 1) & 1 == 1).map(|u| tree_internal(u - 2)).sum();
                tree_internal(s) - saved
            }
        }
        TopologySpec::CycleStar { cycles, amount } => {
            let m = cycles as i64;
            if budget < amount {
                m + 1
            } else if budget >= amount * cycles as f64 {
                0
            } else {
                m + 1 - (budget / amount).floor() as i64
            }
        }
        TopologySpec::CorePeripheryFixed => {
            let k = (budget / 20.0).floor() as i64;
            if budget < 100.0 {
                32 - k
            } else if budget < 200.0 {
                31 - k
            } else if budget < 600.0 {
                30 - k
            } else {
                0
            }
        }
        _ => return Err(Error::UnsupportedTopology(spec.name().to_string())),
    };
    Ok(nd as usize)
}
