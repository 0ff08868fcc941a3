//! One-period borrower–lender network and the quantities derived from a
//! payment vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to decide whether a node pays less than it owes.
pub const DEFAULT_TOL: f64 = 1e-7;

/// `true` when a node owing `pbar` and paying `p` is in default.
pub fn in_default(pbar: f64, p: f64) -> bool {
    pbar - p > DEFAULT_TOL * pbar.max(1.0)
}

/// Liabilities `L[i][j]` (amount `i` owes `j`), external assets and the two
/// weight vectors, with `p̄`, `Π` and neighbour lists cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FinancialNetwork {
    liabilities: Vec<Vec<f64>>,
    pi: Vec<Vec<f64>>,
    pbar: Vec<f64>,
    e: Vec<f64>,
    w: Vec<f64>,
    s: Vec<f64>,
    creditors: Vec<Vec<usize>>,
    borrowers: Vec<Vec<usize>>,
}

impl FinancialNetwork {
    pub fn build(liabilities: Vec<Vec<f64>>, e: Vec<f64>, w: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        let n = liabilities.len();
        for (i, row) in liabilities.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!("row {i} has {} entries, expected {n}", row.len())));
            }
        }
        for (name, v) in [("e", &e), ("w", &w), ("s", &s)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!("{name} has {} entries, expected {n}", v.len())));
            }
        }
        for (i, row) in liabilities.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::NonzeroDiagonal(i));
            }
            if let Some(j) = row.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(Error::NegativeEntry(format!("L[{i}][{j}] = {}", row[j])));
            }
        }
        if let Some(i) = e.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::NegativeEntry(format!("e[{i}] = {}", e[i])));
        }
        for (name, v) in [("w", &w), ("s", &s)] {
            if let Some(i) = v.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::NonPositiveWeight(format!("{name}[{i}] = {}", v[i])));
            }
        }

        let pbar: Vec<f64> = liabilities.iter().map(|row| row.iter().sum()).collect();
        let pi = liabilities
            .iter()
            .zip(&pbar)
            .map(|(row, &total)| {
                if total > 0.0 {
                    row.iter().map(|x| x / total).collect()
                } else {
                    vec![0.0; n]
                }
            })
            .collect();
        let mut creditors = vec![Vec::new(); n];
        let mut borrowers = vec![Vec::new(); n];
        for (i, row) in liabilities.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if x > 0.0 {
                    creditors[i].push(j);
                    borrowers[j].push(i);
                }
            }
        }
        Ok(FinancialNetwork { liabilities, pi, pbar, e, w, s, creditors, borrowers })
    }

    /// Builds from an edge list `(debtor, creditor, amount)`; repeated edges add up.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], e: Vec<f64>, w: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        let mut l = vec![vec![0.0; n]; n];
        for &(i, j, amt) in edges {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch(format!("edge ({i}, {j}) outside {n} nodes")));
            }
            if i == j && amt != 0.0 {
                return Err(Error::NonzeroDiagonal(i));
            }
            l[i][j] += amt;
        }
        Self::build(l, e, w, s)
    }

    pub fn n(&self) -> usize {
        self.pbar.len()
    }

    pub fn liabilities(&self) -> &[Vec<f64>] {
        &self.liabilities
    }

    pub fn liability(&self, i: usize, j: usize) -> f64 {
        self.liabilities[i][j]
    }

    /// Share of `i`'s total debt owed to `j`.
    pub fn pi(&self, i: usize, j: usize) -> f64 {
        self.pi[i][j]
    }

    pub fn pi_matrix(&self) -> &[Vec<f64>] {
        &self.pi
    }

    pub fn pbar(&self) -> &[f64] {
        &self.pbar
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// Nodes `i` owes money to.
    pub fn creditors(&self, i: usize) -> &[usize] {
        &self.creditors[i]
    }

    /// Nodes that owe money to `i`.
    pub fn borrowers(&self, i: usize) -> &[usize] {
        &self.borrowers[i]
    }

    pub fn num_edges(&self) -> usize {
        self.creditors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (i, cs) in self.creditors.iter().enumerate() {
            for &j in cs {
                out.push((i, j, self.liabilities[i][j]));
            }
        }
        out
    }

    /// `Πᵀp`: what each node receives when its borrowers pay `p`.
    pub fn inflow(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (i, cs) in self.creditors.iter().enumerate() {
            if p[i] == 0.0 {
                continue;
            }
            for &j in cs {
                out[j] += self.pi[i][j] * p[i];
            }
        }
        out
    }

    pub fn with_assets(&self, e: Vec<f64>) -> Result<Self> {
        let mut net = self.clone();
        if e.len() != net.n() {
            return Err(Error::DimensionMismatch(format!("e has {} entries, expected {}", e.len(), net.n())));
        }
        if let Some(i) = e.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::NegativeEntry(format!("e[{i}] = {}", e[i])));
        }
        net.e = e;
        Ok(net)
    }

    pub fn with_weights(&self, w: Vec<f64>) -> Result<Self> {
        Self::build(self.liabilities.clone(), self.e.clone(), w, self.s.clone())
    }

    pub fn with_default_weights(&self, s: Vec<f64>) -> Result<Self> {
        Self::build(self.liabilities.clone(), self.e.clone(), self.w.clone(), s)
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            n: self.n(),
            edges: self.edges(),
            e: self.e.clone(),
            w: Some(self.w.clone()),
            s: Some(self.s.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("network file: {e}")))?;
        file.into_network()
    }
}

/// Interchange format: `{"n", "edges": [[i, j, amount]], "e", "w", "s"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub e: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
}

impl NetworkFile {
    pub fn into_network(self) -> Result<FinancialNetwork> {
        let n = self.n;
        let w = self.w.unwrap_or_else(|| vec![1.0; n]);
        let s = self.s.unwrap_or_else(|| vec![1.0; n]);
        FinancialNetwork::from_edges(n, &self.edges, self.e, w, s)
    }
}

/// `wᵀ(p̄ − p)`.
pub fn weighted_unpaid(net: &FinancialNetwork, p: &[f64]) -> Result<f64> {
    if p.len() != net.n() {
        return Err(Error::DimensionMismatch(format!("p has {} entries, expected {}", p.len(), net.n())));
    }
    let mut total = 0.0;
    for (i, (&pi, &pb)) in p.iter().zip(net.pbar()).enumerate() {
        let slack = 1e-9 * (1.0 + pb);
        if pi < -slack || pi > pb + slack || pi.is_nan() {
            return Err(Error::OutOfRangePayment(i));
        }
        total += net.w()[i] * (pb - pi);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearingResult {
    pub p: Vec<f64>,
    pub defaults: Vec<usize>,
    pub unpaid: Vec<f64>,
    /// `Πᵀp + e + c − p`.
    pub surplus: Vec<f64>,
    pub weighted_unpaid: f64,
    pub n_defaults: usize,
    pub iterations: usize,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ClearingResult {
    /// Derives every reported quantity from `p` for the system with cash `c`.
    pub fn from_payments(net: &FinancialNetwork, mut p: Vec<f64>, c: &[f64], iterations: usize) -> Self {
        for (x, &pb) in p.iter_mut().zip(net.pbar()) {
            *x = x.clamp(0.0, pb);
        }
        let inflow = net.inflow(&p);
        let n = net.n();
        let surplus = (0..n).map(|i| inflow[i] + net.e()[i] + c[i] - p[i]).collect();
        let unpaid: Vec<f64> = (0..n).map(|i| net.pbar()[i] - p[i]).collect();
        let defaults: Vec<usize> = (0..n).filter(|&i| in_default(net.pbar()[i], p[i])).collect();
        let weighted_unpaid = unpaid.iter().zip(net.w()).map(|(u, w)| u * w).sum();
        ClearingResult {
            n_defaults: defaults.len(),
            p,
            defaults,
            unpaid,
            surplus,
            weighted_unpaid,
            iterations,
            notes: Vec::new(),
        }
    }

    pub fn total_unpaid(&self) -> f64 {
        self.unpaid.iter().sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveMeta {
    pub solver: String,
    pub iterations: usize,
    pub converged: bool,
    /// Proven relative optimality gap, for branch-and-bound solves.
    #[serde(default)]
    pub gap: Option<f64>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl SolveMeta {
    pub fn new(solver: &str, iterations: usize) -> Self {
        SolveMeta { solver: solver.to_string(), iterations, converged: true, gap: None, notes: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionPlan {
    pub c: Vec<f64>,
    pub budget: f64,
    pub objective: f64,
    pub meta: SolveMeta,
}

impl InjectionPlan {
    pub fn none(n: usize, solver: &str) -> Self {
        InjectionPlan { c: vec![0.0; n], budget: 0.0, objective: 0.0, meta: SolveMeta::new(solver, 0) }
    }

    pub fn total(&self) -> f64 {
        self.c.iter().sum()
    }
}
