//! Budgeted injection when external assets are random: the sampled
//! combined LP, its Benders decomposition and projected stochastic
//! subgradient descent.
//!
//! Values of the scenario programs are kept in `wᵀp` form (larger is
//! better); plan objectives report the mean weighted unpaid liability
//! `wᵀp̄ − (1/M) Σ_m wᵀp^m`.

use contagion_optim::{project_simplex, solve_lp, LinearProgram, LpStatus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clearing::{check_cash, clearing_program, funds, ClearingLp};
use crate::error::{Error, Result};
use crate::netmodel::{FinancialNetwork, InjectionPlan, SolveMeta};

/// Largest `M·N` accepted by [`solve_saa_direct`].
pub const DIRECT_SIZE_LIMIT: usize = 50_000;

/// Per-node asset distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "snake_case")]
pub enum Sampler {
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
    LogNormal { mu: Vec<f64>, sigma: Vec<f64> },
    Constant { e: Vec<f64> },
}

impl Sampler {
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Self {
        Sampler::Uniform { lo: vec![lo; n], hi: vec![hi; n] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Sampler::Uniform { lo, .. } => lo.len(),
            Sampler::LogNormal { mu, .. } => mu.len(),
            Sampler::Constant { e } => e.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Sampler::Uniform { lo, hi } => {
                lo.len() == hi.len() && lo.iter().zip(hi).all(|(a, b)| *a >= 0.0 && a <= b && b.is_finite())
            }
            Sampler::LogNormal { mu, sigma } => {
                mu.len() == sigma.len() && sigma.iter().all(|s| *s >= 0.0 && s.is_finite()) && mu.iter().all(|m| m.is_finite())
            }
            Sampler::Constant { e } => e.iter().all(|x| *x >= 0.0 && x.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("bad sampler parameters: {self:?}")))
        }
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            Sampler::Uniform { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&a, &b)| if a == b { a } else { Uniform::new_inclusive(a, b).expect("checked bounds").sample(rng) })
                .collect(),
            Sampler::LogNormal { mu, sigma } => mu
                .iter()
                .zip(sigma)
                .map(|(&m, &s)| LogNormal::new(m, s).expect("checked parameters").sample(rng))
                .collect(),
            Sampler::Constant { e } => e.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBatch {
    pub scenarios: Vec<Vec<f64>>,
    pub source: String,
}

impl ScenarioBatch {
    pub fn new(scenarios: Vec<Vec<f64>>, source: &str) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::InvalidParams("a scenario batch needs at least one scenario".into()));
        }
        let n = scenarios[0].len();
        for (m, e) in scenarios.iter().enumerate() {
            if e.len() != n {
                return Err(Error::DimensionMismatch(format!("scenario {m} has {} entries, expected {n}", e.len())));
            }
            if let Some(i) = e.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(Error::NegativeEntry(format!("scenario {m}, node {i}: {}", e[i])));
            }
        }
        Ok(ScenarioBatch { scenarios, source: source.to_string() })
    }

    /// `m` draws from `sampler` with `ChaCha8Rng::seed_from_u64(seed)`.
    pub fn sample(sampler: &Sampler, m: usize, seed: u64) -> Result<Self> {
        sampler.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scenarios = (0..m).map(|_| sampler.draw(&mut rng)).collect();
        ScenarioBatch::new(scenarios, &format!("{}:{m}:seed={seed}", sampler_name(sampler)))
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    fn check(&self, net: &FinancialNetwork) -> Result<()> {
        if self.scenarios[0].len() != net.n() {
            return Err(Error::DimensionMismatch(format!(
                "scenarios have {} nodes, network has {}",
                self.scenarios[0].len(),
                net.n()
            )));
        }
        Ok(())
    }
}

fn sampler_name(s: &Sampler) -> &'static str {
    match s {
        Sampler::Uniform { .. } => "uniform",
        Sampler::LogNormal { .. } => "lognormal",
        Sampler::Constant { .. } => "constant",
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidParams(format!("budget must be a finite nonnegative number, got {budget}")));
    }
    Ok(())
}

fn full_value(net: &FinancialNetwork) -> f64 {
    net.w().iter().zip(net.pbar()).map(|(w, p)| w * p).sum()
}

/// `W*(e, c)` and its gradient `−ν` in `c`, from one clearing LP solve.
pub fn scenario_gradient(net: &FinancialNetwork, e: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_cash(net, c)?;
    let f: Vec<f64> = e.iter().zip(c).map(|(a, b)| a + b).collect();
    let sol = solve_lp(&clearing_program(net, &f, net.w()))?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!("clearing LP ended {:?}", sol.status)));
    }
    Ok((full_value(net) - sol.objective, sol.duals.iter().map(|y| -y.max(0.0)).collect()))
}

/// Solves the combined program over `[c, p^1, …, p^M]` in one LP.
/// Returns the plan and `W*(e^m, c*)` for each scenario.
pub fn solve_saa_direct(net: &FinancialNetwork, batch: &ScenarioBatch, budget: f64) -> Result<(InjectionPlan, Vec<f64>)> {
    check_budget(budget)?;
    batch.check(net)?;
    let n = net.n();
    let m = batch.len();
    let size = m * n;
    if size > DIRECT_SIZE_LIMIT {
        return Err(Error::SizeGuardExceeded { size, limit: DIRECT_SIZE_LIMIT });
    }
    let mut lp = LinearProgram::new(n + size);
    for (s, e) in batch.scenarios.iter().enumerate() {
        let off = n + s * n;
        for i in 0..n {
            lp.set_objective(off + i, net.w()[i]);
            lp.set_bounds(off + i, 0.0, net.pbar()[i]);
        }
        for i in 0..n {
            let mut row = vec![(off + i, 1.0)];
            row.extend(net.borrowers(i).iter().map(|&k| (off + k, -net.pi(k, i))));
            row.push((i, -1.0));
            lp.add_le(row, e[i]);
        }
    }
    lp.add_le((0..n).map(|j| (j, 1.0)).collect(), budget);
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!("combined LP ended {:?}", sol.status)));
    }
    let c: Vec<f64> = sol.x[..n].iter().map(|v| v.max(0.0)).collect();
    let total = full_value(net);
    let per: Vec<f64> = (0..m)
        .map(|s| {
            let p = &sol.x[n + s * n..n + (s + 1) * n];
            total - p.iter().zip(net.w()).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    let plan = InjectionPlan {
        objective: total - sol.objective / m as f64,
        c,
        budget,
        meta: SolveMeta::new("saa_direct", sol.iterations),
    };
    Ok((plan, per))
}

/// `θ ≤ constant + slopeᵀc`, aggregated over the scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub constant: f64,
    pub slope: Vec<f64>,
}

impl Cut {
    pub fn evaluate(&self, c: &[f64]) -> f64 {
        self.constant + self.slope.iter().zip(c).map(|(a, b)| a * b).sum::<f64>()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BendersState {
    pub cuts: Vec<Cut>,
    pub incumbent: Vec<f64>,
    /// Master bound after each round, starting from the cut-free bound.
    pub theta: Vec<f64>,
    /// `Σ_m V^m` at the master's point in each round.
    pub lower: Vec<f64>,
    pub rounds: usize,
    pub converged: bool,
}

impl BendersState {
    /// `(θ − Σ V) / (1 + |θ|)` in the last round.
    pub fn gap(&self) -> f64 {
        match (self.theta.last(), self.lower.last()) {
            (Some(t), Some(v)) => (t - v) / (1.0 + t.abs()),
            _ => f64::INFINITY,
        }
    }
}

/// Scenario values and the aggregated cut at `c`.
fn evaluate_scenarios(net: &FinancialNetwork, subs: &mut [ClearingLp<'_>], batch: &ScenarioBatch, c: &[f64]) -> Result<(f64, Cut)> {
    let n = net.n();
    let parts: Vec<Result<(f64, f64, Vec<f64>)>> = subs
        .par_iter_mut()
        .zip(&batch.scenarios)
        .map(|(sub, e)| {
            let f: Vec<f64> = e.iter().zip(c).map(|(a, b)| a + b).collect();
            let sol = sub.solve(&f)?;
            let nu: Vec<f64> = sol.duals.iter().map(|y| y.max(0.0)).collect();
            let mu_part: f64 = sol.reduced_costs.iter().zip(net.pbar()).map(|(d, pb)| d.max(0.0) * pb).sum();
            let e_part: f64 = e.iter().zip(&nu).map(|(a, b)| a * b).sum();
            Ok((sol.objective, mu_part + e_part, nu))
        })
        .collect();
    let mut value = 0.0;
    let mut cut = Cut { constant: 0.0, slope: vec![0.0; n] };
    for part in parts {
        let (v, k, nu) = part?;
        value += v;
        cut.constant += k;
        for (s, x) in cut.slope.iter_mut().zip(&nu) {
            *s += x;
        }
    }
    Ok((value, cut))
}

fn solve_master(n: usize, cuts: &[Cut], budget: f64, theta_cap: f64) -> Result<(Vec<f64>, f64)> {
    let mut lp = LinearProgram::new(n + 1);
    lp.set_objective(n, 1.0);
    lp.set_bounds(n, f64::NEG_INFINITY, theta_cap);
    lp.add_le((0..n).map(|j| (j, 1.0)).collect(), budget);
    for cut in cuts {
        let mut row = vec![(n, 1.0)];
        row.extend(cut.slope.iter().enumerate().filter(|(_, s)| **s != 0.0).map(|(j, s)| (j, -s)));
        lp.add_le(row, cut.constant);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!("Benders master ended {:?}", sol.status)));
    }
    Ok((sol.x[..n].iter().map(|v| v.max(0.0)).collect(), sol.x[n]))
}

/// Benders decomposition of the combined program. The master carries the
/// trivial bound `θ ≤ M·wᵀp̄`, which is also the initial `θ`.
pub fn solve_saa_benders(
    net: &FinancialNetwork,
    batch: &ScenarioBatch,
    budget: f64,
    tol: f64,
    max_rounds: usize,
) -> Result<(InjectionPlan, BendersState)> {
    check_budget(budget)?;
    batch.check(net)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let n = net.n();
    let m = batch.len() as f64;
    let cap = m * full_value(net);
    let mut subs: Vec<ClearingLp<'_>> = (0..batch.len()).map(|_| ClearingLp::new(net, net.w())).collect();
    let mut state = BendersState { incumbent: vec![0.0; n], theta: vec![cap], ..BendersState::default() };
    let mut c = vec![0.0; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        state.rounds += 1;
        let (value, cut) = evaluate_scenarios(net, &mut subs, batch, &c)?;
        state.lower.push(value);
        if value > best {
            best = value;
            state.incumbent = c.clone();
        }
        let theta = *state.theta.last().expect("seeded with the cap");
        if theta - best <= tol * (1.0 + theta.abs()) {
            state.converged = true;
            break;
        }
        if state.rounds >= max_rounds {
            break;
        }
        state.cuts.push(cut);
        let (next, t) = solve_master(n, &state.cuts, budget, cap)?;
        // the master only tightens; guard against pivoting noise
        state.theta.push(t.min(theta));
        c = next;
    }
    let mut meta = SolveMeta::new("saa_benders", state.rounds);
    meta.converged = state.converged;
    if !state.converged {
        meta.notes.push(format!("gap {:.3e} after {} rounds", state.gap(), state.rounds));
    }
    let plan = InjectionPlan { objective: full_value(net) - best / m, c: state.incumbent.clone(), budget, meta };
    Ok((plan, state))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub iters: usize,
    /// Step size `γ_m = gamma0 / m`; `None` uses the budget.
    pub gamma0: Option<f64>,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { iters: 2000, gamma0: None, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SgdTrace {
    /// `W*(e^m, c^{m−1})` for each step.
    pub sampled_objective: Vec<f64>,
    /// `1ᵀc^m` after each projection.
    pub totals: Vec<f64>,
}

/// Projected stochastic subgradient descent on the budget simplex, returning
/// the average of the last half of the iterates.
pub fn solve_saa_sgd(
    net: &FinancialNetwork,
    sampler: &Sampler,
    budget: f64,
    cfg: &SgdConfig,
) -> Result<(InjectionPlan, SgdTrace)> {
    check_budget(budget)?;
    sampler.validate()?;
    let n = net.n();
    if sampler.dim() != n {
        return Err(Error::DimensionMismatch(format!("sampler has {} nodes, network has {n}", sampler.dim())));
    }
    if cfg.iters == 0 {
        return Err(Error::InvalidParams("SGD needs at least one iteration".into()));
    }
    let gamma0 = cfg.gamma0.unwrap_or(budget.max(1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut lp = ClearingLp::new(net, net.w());
    let total = full_value(net);
    let mut c = vec![budget / n as f64; n];
    let mut avg = vec![0.0; n];
    let tail_start = cfg.iters / 2 + 1;
    let mut trace = SgdTrace::default();
    for m in 1..=cfg.iters {
        let e = sampler.draw(&mut rng);
        let sol = lp.solve(&funds(&net.with_assets(e)?, &c))?;
        trace.sampled_objective.push(total - sol.objective);
        let gamma = gamma0 / m as f64;
        let stepped: Vec<f64> = c.iter().zip(&sol.duals).map(|(x, y)| x + gamma * y.max(0.0)).collect();
        c = project_simplex(&stepped, budget);
        trace.totals.push(c.iter().sum());
        if m >= tail_start {
            for (a, x) in avg.iter_mut().zip(&c) {
                *a += x;
            }
        }
    }
    let count = (cfg.iters - tail_start + 1) as f64;
    avg.iter_mut().for_each(|a| *a /= count);
    let mut meta = SolveMeta::new("saa_sgd", cfg.iters);
    meta.notes.push(format!("gamma0 {gamma0}, tail average over {count} iterates"));
    let tail = &trace.sampled_objective[tail_start - 1..];
    let plan = InjectionPlan { objective: tail.iter().sum::<f64>() / tail.len() as f64, c: avg, budget, meta };
    Ok((plan, trace))
}

/// `(1/M) Σ_m W*(e^m, c)` and its standard error.
pub fn saa_estimate(net: &FinancialNetwork, batch: &ScenarioBatch, c: &[f64]) -> Result<(f64, f64)> {
    batch.check(net)?;
    check_cash(net, c)?;
    let values: Vec<Result<f64>> = batch
        .scenarios
        .par_iter()
        .map(|e| {
            let mut lp = ClearingLp::new(net, net.w());
            let f: Vec<f64> = e.iter().zip(c).map(|(a, b)| a + b).collect();
            Ok(full_value(net) - lp.solve(&f)?.objective)
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
    Ok((mean, (var / m).sqrt()))
}
