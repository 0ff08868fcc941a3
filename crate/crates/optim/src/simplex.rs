//! Bounded-variable revised simplex with a product-form inverse.
//!
//! Internal column layout for a program with `n` variables and `m` rows:
//! `0..n` structural, `n..n+m` logicals (slack of row r has coefficient +1 in
//! row r, bounds `[0, ∞)` for `Le` rows and `[0, 0]` for `Eq` rows), and
//! `n+m..n+2m` artificials (coefficient `±1` in row r, only free to move
//! during phase 1).

use crate::error::OptimError;
use crate::lp::{Basis, LinearProgram, LpSolution, LpStatus, RowKind};
use crate::{FEAS_TOL, OPT_TOL};

const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
const REFACTOR_EVERY: usize = 100;
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic with both bounds infinite, held at zero.
    Free,
}

struct Eta {
    row: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

enum Step {
    Pivot { row: usize, theta: f64, to_upper: bool },
    Flip { theta: f64 },
    Unbounded,
}

enum PrimalEnd {
    Optimal,
    Unbounded { entering: usize, dir: f64 },
}

enum DualEnd {
    Optimal,
    Infeasible,
}

struct Simplex {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    art_sign: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    etas: Vec<Eta>,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
    bland: bool,
}

impl Simplex {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (r, row) in lp.rows().iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((r, a));
            }
        }
        for col in &mut cols {
            col.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for &(r, a) in col.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == r => last.1 += a,
                    _ => merged.push((r, a)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            *col = merged;
        }
        let total = n + 2 * m;
        let mut cost = vec![0.0; total];
        cost[..n].copy_from_slice(lp.objective());
        let mut lo = vec![0.0; total];
        let mut hi = vec![0.0; total];
        lo[..n].copy_from_slice(lp.lower());
        hi[..n].copy_from_slice(lp.upper());
        for (r, row) in lp.rows().iter().enumerate() {
            if row.kind == RowKind::Le {
                hi[n + r] = f64::INFINITY;
            }
        }
        Simplex {
            m,
            n,
            cols,
            b: lp.rows().iter().map(|r| r.rhs).collect(),
            cost,
            lo,
            hi,
            art_sign: vec![1.0; m],
            x: vec![0.0; total],
            state: vec![VarState::AtLower; total],
            basis: vec![0; m],
            etas: Vec::new(),
            since_refactor: 0,
            iterations: 0,
            max_iterations: 50 * (n + m) + 10_000,
            bland: false,
        }
    }

    fn total(&self) -> usize {
        self.n + 2 * self.m
    }

    fn scatter_col(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            for &(r, a) in &self.cols[j] {
                out[r] += a;
            }
        } else if j < self.n + self.m {
            out[j - self.n] += 1.0;
        } else {
            let r = j - self.n - self.m;
            out[r] += self.art_sign[r];
        }
    }

    fn dot_col(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(r, a)| a * y[r]).sum()
        } else if j < self.n + self.m {
            y[j - self.n]
        } else {
            let r = j - self.n - self.m;
            self.art_sign[r] * y[r]
        }
    }

    fn col_nnz(&self, j: usize) -> usize {
        if j < self.n {
            self.cols[j].len()
        } else {
            1
        }
    }

    fn ftran(&self, v: &mut [f64]) {
        for eta in &self.etas {
            let xr = v[eta.row];
            if xr == 0.0 {
                continue;
            }
            let xr = xr / eta.pivot;
            v[eta.row] = xr;
            for &(i, a) in &eta.entries {
                v[i] -= a * xr;
            }
        }
    }

    fn btran(&self, v: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = v[eta.row];
            for &(i, a) in &eta.entries {
                s -= a * v[i];
            }
            v[eta.row] = s / eta.pivot;
        }
    }

    fn push_eta(&mut self, row: usize, alpha: &[f64]) {
        let pivot = alpha[row];
        let entries: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != row && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        if pivot == 1.0 && entries.is_empty() {
            return;
        }
        self.etas.push(Eta { row, pivot, entries });
    }

    /// Places a nonbasic variable at the bound nearest its current value.
    fn park(&mut self, j: usize) {
        let (lo, hi) = (self.lo[j], self.hi[j]);
        let v = self.x[j];
        if lo.is_finite() && (!hi.is_finite() || (v - lo).abs() <= (hi - v).abs()) {
            self.state[j] = VarState::AtLower;
            self.x[j] = lo;
        } else if hi.is_finite() {
            self.state[j] = VarState::AtUpper;
            self.x[j] = hi;
        } else {
            self.state[j] = VarState::Free;
            self.x[j] = 0.0;
        }
    }

    /// Rebuilds the eta file from the current basic set. Columns that turn out
    /// dependent are replaced by logicals.
    fn reinvert(&mut self) -> Result<(), OptimError> {
        let m = self.m;
        let basics: Vec<usize> = self.basis.clone();
        self.etas.clear();
        let mut taken = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        let mut rest = Vec::new();
        for &j in &basics {
            if j >= self.n {
                let r = (j - self.n) % m;
                if !taken[r] {
                    taken[r] = true;
                    new_basis[r] = j;
                    let sign = if j >= self.n + m { self.art_sign[r] } else { 1.0 };
                    if sign != 1.0 {
                        self.etas.push(Eta { row: r, pivot: sign, entries: Vec::new() });
                    }
                    continue;
                }
            }
            rest.push(j);
        }
        rest.sort_by_key(|&j| (self.col_nnz(j), j));
        let mut work = vec![0.0; m];
        for j in rest {
            work.iter_mut().for_each(|w| *w = 0.0);
            self.scatter_col(j, &mut work);
            let scale = work.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            self.ftran(&mut work);
            let mut best = None;
            let mut best_val = 0.0;
            for (r, &v) in work.iter().enumerate() {
                if !taken[r] && v.abs() > best_val {
                    best_val = v.abs();
                    best = Some(r);
                }
            }
            match best {
                Some(r) if best_val > 1e-11 * scale => {
                    taken[r] = true;
                    new_basis[r] = j;
                    self.push_eta(r, &work);
                }
                _ => self.park(j),
            }
        }
        for r in 0..m {
            if taken[r] {
                continue;
            }
            let slack = self.n + r;
            let art = self.n + m + r;
            let j = if !new_basis.contains(&slack) {
                slack
            } else if !new_basis.contains(&art) {
                art
            } else {
                return Err(OptimError::NumericalFailure("basis repair failed".into()));
            };
            self.state[j] = VarState::Basic;
            new_basis[r] = j;
            let sign = if j == art { self.art_sign[r] } else { 1.0 };
            if sign != 1.0 {
                self.etas.push(Eta { row: r, pivot: sign, entries: Vec::new() });
            }
        }
        for &j in &new_basis {
            self.state[j] = VarState::Basic;
        }
        self.basis = new_basis;
        self.since_refactor = 0;
        self.recompute_basic_values();
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.total() {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                let v = self.x[j];
                if j < self.n {
                    for &(r, a) in &self.cols[j] {
                        rhs[r] -= a * v;
                    }
                } else if j < self.n + self.m {
                    rhs[j - self.n] -= v;
                } else {
                    let r = j - self.n - self.m;
                    rhs[r] -= self.art_sign[r] * v;
                }
            }
        }
        self.ftran(&mut rhs);
        for (r, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[r];
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        self.btran(&mut y);
        y
    }

    fn primal_infeasibility(&self, r: usize) -> f64 {
        let j = self.basis[r];
        let v = self.x[j];
        if v < self.lo[j] {
            self.lo[j] - v
        } else if v > self.hi[j] {
            v - self.hi[j]
        } else {
            0.0
        }
    }

    fn feas_tol(&self) -> f64 {
        let bnorm = self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        FEAS_TOL * (1.0 + bnorm)
    }

    fn is_primal_feasible(&self) -> bool {
        let tol = self.feas_tol();
        (0..self.m).all(|r| self.primal_infeasibility(r) <= tol)
    }

    fn price(&self, cost: &[f64], y: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.total() {
            let st = self.state[j];
            if st == VarState::Basic || (st != VarState::Free && self.lo[j] == self.hi[j]) {
                continue;
            }
            let d = cost[j] - self.dot_col(j, y);
            let dir = match st {
                VarState::AtLower if d > OPT_TOL => 1.0,
                VarState::AtUpper if d < -OPT_TOL => -1.0,
                VarState::Free if d.abs() > OPT_TOL => d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Harris two-pass ratio test; `alpha = B⁻¹a_q`, entering moves in `dir`.
    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64]) -> Step {
        let range = self.hi[q] - self.lo[q];
        let tol = if self.bland { 0.0 } else { self.feas_tol() };
        // per unit of θ, x_B[r] changes by -dir * alpha[r]
        let bound_ratio = |r: usize, slack: f64| -> Option<(f64, bool)> {
            let a = alpha[r];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            let j = self.basis[r];
            let rate = -dir * a;
            if rate < 0.0 {
                self.lo[j]
                    .is_finite()
                    .then(|| (((self.x[j] - self.lo[j] + slack) / -rate), false))
            } else {
                self.hi[j]
                    .is_finite()
                    .then(|| (((self.hi[j] + slack - self.x[j]) / rate), true))
            }
        };
        let mut theta_max = f64::INFINITY;
        for r in 0..self.m {
            if let Some((t, _)) = bound_ratio(r, tol) {
                theta_max = theta_max.min(t);
            }
        }
        if range.is_finite() && range <= theta_max {
            return Step::Flip { theta: range };
        }
        if theta_max == f64::INFINITY {
            return Step::Unbounded;
        }
        let mut chosen: Option<(usize, f64, bool)> = None;
        for r in 0..self.m {
            let Some((t, up)) = bound_ratio(r, 0.0) else { continue };
            if t > theta_max {
                continue;
            }
            let better = match chosen {
                None => true,
                Some((c, ct, _)) if self.bland => {
                    t < ct || (t == ct && self.basis[r] < self.basis[c])
                }
                Some((c, _, _)) => alpha[r].abs() > alpha[c].abs(),
            };
            if better {
                chosen = Some((r, t, up));
            }
        }
        let chosen = chosen.map(|(r, t, up)| (r, t.max(0.0), up));
        match chosen {
            Some((row, theta, to_upper)) => Step::Pivot { row, theta, to_upper },
            None => Step::Unbounded,
        }
    }

    fn move_along(&mut self, q: usize, delta: f64, alpha: &[f64]) {
        if delta == 0.0 {
            return;
        }
        for r in 0..self.m {
            if alpha[r] != 0.0 {
                let j = self.basis[r];
                self.x[j] -= delta * alpha[r];
            }
        }
        self.x[q] += delta;
    }

    fn pivot(&mut self, q: usize, row: usize, alpha: &[f64], leaving_state: VarState) {
        let leaving = self.basis[row];
        self.state[leaving] = leaving_state;
        self.x[leaving] = match leaving_state {
            VarState::AtUpper => self.hi[leaving],
            VarState::Free => 0.0,
            _ => self.lo[leaving],
        };
        self.state[q] = VarState::Basic;
        self.basis[row] = q;
        self.push_eta(row, alpha);
        self.since_refactor += 1;
    }

    fn tick(&mut self) -> Result<(), OptimError> {
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(OptimError::IterationLimit(self.max_iterations));
        }
        if self.since_refactor >= REFACTOR_EVERY {
            self.reinvert()?;
        }
        Ok(())
    }

    fn primal(&mut self, cost: &[f64]) -> Result<PrimalEnd, OptimError> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        let mut stalled = 0usize;
        self.bland = false;
        loop {
            let y = self.duals(cost);
            let Some((q, dir)) = self.price(cost, &y) else {
                return Ok(PrimalEnd::Optimal);
            };
            alpha.iter_mut().for_each(|a| *a = 0.0);
            self.scatter_col(q, &mut alpha);
            self.ftran(&mut alpha);
            let theta = match self.ratio_test(q, dir, &alpha) {
                Step::Unbounded => return Ok(PrimalEnd::Unbounded { entering: q, dir }),
                Step::Flip { theta } => {
                    self.move_along(q, dir * theta, &alpha);
                    if dir > 0.0 {
                        self.state[q] = VarState::AtUpper;
                        self.x[q] = self.hi[q];
                    } else {
                        self.state[q] = VarState::AtLower;
                        self.x[q] = self.lo[q];
                    }
                    theta
                }
                Step::Pivot { row, theta, to_upper } => {
                    self.move_along(q, dir * theta, &alpha);
                    let leaving = self.basis[row];
                    let st = if self.lo[leaving] == f64::NEG_INFINITY
                        && self.hi[leaving] == f64::INFINITY
                    {
                        VarState::Free
                    } else if to_upper {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.pivot(q, row, &alpha, st);
                    theta
                }
            };
            if theta <= 1e-12 {
                stalled += 1;
                if stalled > STALL_LIMIT {
                    self.bland = true;
                }
            } else {
                stalled = 0;
                self.bland = false;
            }
            self.tick()?;
        }
    }

    /// Bounded dual simplex; requires a dual feasible basis for `cost`.
    fn dual(&mut self, cost: &[f64]) -> Result<DualEnd, OptimError> {
        let m = self.m;
        let total = self.total();
        let tol = self.feas_tol();
        let mut rho = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        loop {
            let mut leave = None;
            let mut worst = tol;
            for r in 0..m {
                let inf = self.primal_infeasibility(r);
                if inf > worst {
                    worst = inf;
                    leave = Some(r);
                }
            }
            let Some(r) = leave else {
                return Ok(DualEnd::Optimal);
            };
            let jl = self.basis[r];
            // leaving goes to the violated bound; delta_sign < 0 means x_B[r] must decrease
            let below = self.x[jl] < self.lo[jl];
            let y = self.duals(cost);
            rho.iter_mut().for_each(|v| *v = 0.0);
            rho[r] = 1.0;
            self.btran(&mut rho);
            let mut best: Option<(usize, f64)> = None;
            let mut best_ratio = f64::INFINITY;
            let mut best_piv = 0.0;
            for j in 0..total {
                let st = self.state[j];
                if st == VarState::Basic || (st != VarState::Free && self.lo[j] == self.hi[j]) {
                    continue;
                }
                let arj = self.dot_col(j, &rho);
                if arj.abs() <= PIVOT_TOL {
                    continue;
                }
                // x_B[r] moves by -arj * Δx_j; we need it to increase if below
                let dir = if below { -arj.signum() } else { arj.signum() };
                let ok = match st {
                    VarState::AtLower => dir > 0.0,
                    VarState::AtUpper => dir < 0.0,
                    VarState::Free => true,
                    VarState::Basic => false,
                };
                if !ok {
                    continue;
                }
                let d = cost[j] - self.dot_col(j, &y);
                let ratio = d.abs() / arj.abs();
                if ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && arj.abs() > best_piv) {
                    best_ratio = ratio;
                    best_piv = arj.abs();
                    best = Some((j, dir));
                }
            }
            let Some((q, _dir)) = best else {
                return Ok(DualEnd::Infeasible);
            };
            alpha.iter_mut().for_each(|a| *a = 0.0);
            self.scatter_col(q, &mut alpha);
            self.ftran(&mut alpha);
            if alpha[r].abs() <= PIVOT_TOL {
                self.reinvert()?;
                self.tick()?;
                continue;
            }
            let target = if below { self.lo[jl] } else { self.hi[jl] };
            let delta = (self.x[jl] - target) / alpha[r];
            self.move_along(q, delta, &alpha);
            let st = if below { VarState::AtLower } else { VarState::AtUpper };
            self.pivot(q, r, &alpha, st);
            self.tick()?;
        }
    }

    fn is_dual_feasible(&self, cost: &[f64]) -> bool {
        let y = self.duals(cost);
        for j in 0..self.total() {
            let st = self.state[j];
            if st == VarState::Basic || (st != VarState::Free && self.lo[j] == self.hi[j]) {
                continue;
            }
            let d = cost[j] - self.dot_col(j, &y);
            let bad = match st {
                VarState::AtLower => d > 1e-7,
                VarState::AtUpper => d < -1e-7,
                VarState::Free => d.abs() > 1e-7,
                VarState::Basic => false,
            };
            if bad {
                return false;
            }
        }
        true
    }

    fn cold_start(&mut self) -> Result<(), OptimError> {
        let n = self.n;
        let m = self.m;
        for j in 0..n {
            self.x[j] = 0.0;
            self.park(j);
        }
        let mut resid = self.b.clone();
        for j in 0..n {
            let v = self.x[j];
            if v != 0.0 {
                for &(r, a) in &self.cols[j] {
                    resid[r] -= a * v;
                }
            }
        }
        for r in 0..m {
            let slack = n + r;
            let art = n + m + r;
            self.hi[art] = 0.0;
            self.state[art] = VarState::AtLower;
            self.x[art] = 0.0;
            if self.hi[slack] == f64::INFINITY && resid[r] >= 0.0 {
                self.state[slack] = VarState::Basic;
                self.basis[r] = slack;
            } else {
                self.state[slack] = VarState::AtLower;
                self.x[slack] = 0.0;
                self.art_sign[r] = if resid[r] >= 0.0 { 1.0 } else { -1.0 };
                self.hi[art] = f64::INFINITY;
                self.state[art] = VarState::Basic;
                self.basis[r] = art;
            }
        }
        self.reinvert()
    }

    fn close_artificials(&mut self) {
        let (n, m) = (self.n, self.m);
        for art in n + m..n + 2 * m {
            self.hi[art] = 0.0;
            if self.state[art] != VarState::Basic {
                self.state[art] = VarState::AtLower;
                self.x[art] = 0.0;
            }
        }
    }

    fn phase_one(&mut self) -> Result<bool, OptimError> {
        let (n, m) = (self.n, self.m);
        if (n + m..n + 2 * m).all(|j| self.hi[j] == 0.0) {
            return Ok(true);
        }
        let mut cost1 = vec![0.0; self.total()];
        for c in cost1.iter_mut().skip(n + m) {
            *c = -1.0;
        }
        self.primal(&cost1)?;
        self.recompute_basic_values();
        let infeas: f64 = (n + m..n + 2 * m).map(|j| self.x[j].max(0.0)).sum();
        if infeas > 10.0 * self.feas_tol() {
            return Ok(false);
        }
        self.close_artificials();
        self.recompute_basic_values();
        Ok(true)
    }

    fn basis_snapshot(&self) -> Basis {
        Basis { states: self.state.clone(), art_sign: self.art_sign.clone() }
    }

    fn finish(&mut self, status: LpStatus, certificate: Option<Vec<f64>>) -> LpSolution {
        let n = self.n;
        let cost = self.cost.clone();
        let y = self.duals(&cost);
        let reduced_costs: Vec<f64> = (0..n).map(|j| cost[j] - self.dot_col(j, &y)).collect();
        let mut x: Vec<f64> = self.x[..n].to_vec();
        for (j, v) in x.iter_mut().enumerate() {
            // snap tiny excursions back onto the bounds
            if *v < self.lo[j] && self.lo[j] - *v <= self.feas_tol() {
                *v = self.lo[j];
            }
            if *v > self.hi[j] && *v - self.hi[j] <= self.feas_tol() {
                *v = self.hi[j];
            }
        }
        let objective = x.iter().zip(&cost[..n]).map(|(a, c)| a * c).sum();
        LpSolution {
            status,
            x,
            objective,
            duals: y,
            reduced_costs,
            iterations: self.iterations,
            basis: (status == LpStatus::Optimal).then(|| self.basis_snapshot()),
            certificate,
        }
    }

    fn unbounded_ray(&self, q: usize, dir: f64) -> Vec<f64> {
        let mut alpha = vec![0.0; self.m];
        self.scatter_col(q, &mut alpha);
        self.ftran(&mut alpha);
        let mut ray = vec![0.0; self.n];
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                ray[j] = -dir * alpha[r];
            }
        }
        if q < self.n {
            ray[q] = dir;
        }
        ray
    }

    fn infeasible(&mut self) -> LpSolution {
        let (n, m) = (self.n, self.m);
        let mut cost1 = vec![0.0; self.total()];
        for c in cost1.iter_mut().skip(n + m) {
            *c = -1.0;
        }
        let y = self.duals(&cost1);
        let mut sol = self.finish(LpStatus::Infeasible, Some(y));
        sol.objective = f64::NAN;
        sol
    }

    fn run_phase_two(&mut self) -> Result<LpSolution, OptimError> {
        let cost = self.cost.clone();
        match self.primal(&cost)? {
            PrimalEnd::Optimal => {
                self.reinvert()?;
                if !self.is_primal_feasible() {
                    // drift after refactorization; one more pass from the fresh inverse
                    if self.is_dual_feasible(&cost) {
                        if let DualEnd::Infeasible = self.dual(&cost)? {
                            return Ok(self.infeasible());
                        }
                    }
                    if let PrimalEnd::Unbounded { entering, dir } = self.primal(&cost)? {
                        let ray = self.unbounded_ray(entering, dir);
                        return Ok(self.finish(LpStatus::Unbounded, Some(ray)));
                    }
                }
                Ok(self.finish(LpStatus::Optimal, None))
            }
            PrimalEnd::Unbounded { entering, dir } => {
                let ray = self.unbounded_ray(entering, dir);
                let mut sol = self.finish(LpStatus::Unbounded, Some(ray));
                sol.objective = f64::INFINITY;
                Ok(sol)
            }
        }
    }

    fn contradictory_bounds(&self) -> bool {
        (0..self.n).any(|j| self.lo[j] > self.hi[j])
    }

    fn trivial_infeasible(&self) -> LpSolution {
        LpSolution {
            status: LpStatus::Infeasible,
            x: vec![0.0; self.n],
            objective: f64::NAN,
            duals: vec![0.0; self.m],
            reduced_costs: vec![0.0; self.n],
            iterations: 0,
            basis: None,
            certificate: None,
        }
    }
}

pub(crate) fn solve_cold(lp: &LinearProgram) -> Result<LpSolution, OptimError> {
    let mut s = Simplex::new(lp);
    if s.contradictory_bounds() {
        return Ok(s.trivial_infeasible());
    }
    s.cold_start()?;
    if !s.phase_one()? {
        return Ok(s.infeasible());
    }
    s.run_phase_two()
}

pub(crate) fn solve_warm(lp: &LinearProgram, basis: &Basis) -> Result<LpSolution, OptimError> {
    let mut s = Simplex::new(lp);
    if s.contradictory_bounds() {
        return Ok(s.trivial_infeasible());
    }
    if basis.states.len() != s.total() || basis.art_sign.len() != s.m || basis.num_basic() != s.m {
        return solve_cold(lp);
    }
    s.art_sign = basis.art_sign.clone();
    let mut basics = Vec::with_capacity(s.m);
    for j in 0..s.total() {
        match basis.states[j] {
            VarState::Basic => {
                s.state[j] = VarState::Basic;
                basics.push(j);
            }
            VarState::AtUpper if s.hi[j].is_finite() => {
                s.state[j] = VarState::AtUpper;
                s.x[j] = s.hi[j];
            }
            VarState::AtLower if s.lo[j].is_finite() => {
                s.state[j] = VarState::AtLower;
                s.x[j] = s.lo[j];
            }
            _ => {
                s.x[j] = 0.0;
                s.park(j);
            }
        }
    }
    s.basis = basics;
    let iterations_before = s.iterations;
    s.reinvert()?;
    let cost = s.cost.clone();
    if s.is_primal_feasible() {
        return s.run_phase_two();
    }
    if s.is_dual_feasible(&cost) {
        match s.dual(&cost) {
            Ok(DualEnd::Optimal) => return s.run_phase_two(),
            Ok(DualEnd::Infeasible) => {
                // confirm with a cold solve so the certificate comes from phase 1
                let mut sol = solve_cold(lp)?;
                sol.iterations += s.iterations - iterations_before;
                return Ok(sol);
            }
            Err(OptimError::IterationLimit(_)) | Err(OptimError::NumericalFailure(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let mut sol = solve_cold(lp)?;
    sol.iterations += s.iterations;
    Ok(sol)
}
