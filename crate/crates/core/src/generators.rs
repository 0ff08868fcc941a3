//! Constructors for the deterministic and random test topologies.
//!
//! Random variants draw from `ChaCha8Rng::seed_from_u64(seed)` in a fixed
//! order (row-major over node pairs, then assets), so a seed pins a network.
//! Amounts drawn as exactly zero are not stored as edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::FinancialNetwork;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "snake_case")]
pub enum TopologySpec {
    BinaryTree { levels: u32 },
    CycleStar { cycles: usize, amount: f64 },
    CorePeripheryFixed,
    /// Each ordered pair owes `U[0, amount_hi]` with probability `prob`.
    RandomDense { n: usize, prob: f64, amount_hi: f64, e_hi: f64 },
    /// Fully connected core, `periphery` nodes per core node each owing
    /// `U[0, periph_hi]` to it. Core nodes get weight `core_weight`.
    RandomCorePeriphery { core: usize, periphery: usize, core_hi: f64, periph_hi: f64, e_hi: f64, core_weight: f64 },
    /// Core nodes `0..long_cores` carry chains of `chain_len` periphery nodes
    /// sharing one `U[0, periph_hi]` amount; the rest carry single nodes.
    RandomCpChains { core: usize, long_cores: usize, chains: usize, chain_len: usize, core_hi: f64, periph_hi: f64 },
    Knapsack { pbar_head: Vec<f64> },
    /// Every ordered pair owes `U[0,1]`; assets `U[0,1]`.
    FullyConnected { n: usize },
    /// `i` owes `U[0,10]` to `i+1`; assets `U[0,1]`.
    LinearChain { n: usize },
}

impl TopologySpec {
    pub fn random_dense() -> Self {
        TopologySpec::RandomDense { n: 30, prob: 0.2, amount_hi: 2.0, e_hi: 0.0 }
    }

    pub fn random_core_periphery() -> Self {
        TopologySpec::RandomCorePeriphery {
            core: 5,
            periphery: 20,
            core_hi: 20.0,
            periph_hi: 1.0,
            e_hi: 0.0,
            core_weight: 1.0,
        }
    }

    /// 15 core nodes with 70 periphery nodes each, core weight 10, no assets.
    pub fn large_core_periphery() -> Self {
        TopologySpec::RandomCorePeriphery {
            core: 15,
            periphery: 70,
            core_hi: 10.0,
            periph_hi: 1.0,
            e_hi: 0.0,
            core_weight: 10.0,
        }
    }

    /// The clearing-benchmark variant: same shape, assets `U[0, 0.25]`, unit weights.
    pub fn benchmark_core_periphery() -> Self {
        TopologySpec::RandomCorePeriphery {
            core: 15,
            periphery: 70,
            core_hi: 10.0,
            periph_hi: 1.0,
            e_hi: 0.25,
            core_weight: 1.0,
        }
    }

    pub fn random_cp_chains() -> Self {
        TopologySpec::RandomCpChains { core: 5, long_cores: 2, chains: 20, chain_len: 3, core_hi: 20.0, periph_hi: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TopologySpec::BinaryTree { .. } => "binary_tree",
            TopologySpec::CycleStar { .. } => "cycle_star",
            TopologySpec::CorePeripheryFixed => "core_periphery_fixed",
            TopologySpec::RandomDense { .. } => "random_dense",
            TopologySpec::RandomCorePeriphery { .. } => "random_core_periphery",
            TopologySpec::RandomCpChains { .. } => "random_cp_chains",
            TopologySpec::Knapsack { .. } => "knapsack",
            TopologySpec::FullyConnected { .. } => "fully_connected",
            TopologySpec::LinearChain { .. } => "linear_chain",
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(
            self,
            TopologySpec::RandomDense { .. }
                | TopologySpec::RandomCorePeriphery { .. }
                | TopologySpec::RandomCpChains { .. }
                | TopologySpec::FullyConnected { .. }
                | TopologySpec::LinearChain { .. }
        )
    }
}

/// Builds any topology; the seed is ignored by deterministic variants.
pub fn generate(spec: &TopologySpec, seed: u64) -> Result<FinancialNetwork> {
    match spec {
        TopologySpec::BinaryTree { levels } => gen_binary_tree(*levels),
        TopologySpec::CycleStar { cycles, amount } => gen_cycle_star(*cycles, *amount),
        TopologySpec::CorePeripheryFixed => Ok(gen_core_periphery_fixed()),
        TopologySpec::Knapsack { pbar_head } => gen_knapsack(pbar_head),
        _ => gen_random(spec, seed),
    }
}

fn unit(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

fn network(n: usize, edges: &[(usize, usize, f64)], e: Vec<f64>) -> FinancialNetwork {
    FinancialNetwork::from_edges(n, edges, e, unit(n), unit(n)).expect("generator produces a valid network")
}

/// The four-node example: A owes 50 to B and C, B owes 20 to C, C owes 80
/// to A, D owes 10 to C; every node holds 1.
pub fn four_node() -> FinancialNetwork {
    let edges = [(0, 1, 50.0), (0, 2, 50.0), (1, 2, 20.0), (2, 0, 80.0), (3, 2, 10.0)];
    network(4, &edges, vec![1.0; 4])
}

/// Full binary tree in level order; node `k` lends to `2k+1` and `2k+2`.
pub fn gen_binary_tree(levels: u32) -> Result<FinancialNetwork> {
    if !(2..=24).contains(&levels) {
        return Err(Error::InvalidParams(format!("tree needs 2..=24 levels, got {levels}")));
    }
    let n = (1usize << levels) - 1;
    let mut edges = Vec::new();
    for s in 0..levels - 1 {
        let amount = f64::from(1u32 << (levels - s));
        for k in (1usize << s) - 1..(1usize << (s + 1)) - 1 {
            edges.push((k, 2 * k + 1, amount));
            edges.push((k, 2 * k + 2, amount));
        }
    }
    Ok(network(n, &edges, vec![0.0; n]))
}

/// Root 0 lends into `cycles` six-node rings; ring `k` occupies `1+6k..=6+6k`.
pub fn gen_cycle_star(cycles: usize, amount: f64) -> Result<FinancialNetwork> {
    if cycles == 0 || !(amount > 0.0) || !amount.is_finite() {
        return Err(Error::InvalidParams(format!("cycle star needs M ≥ 1 and a > 0, got {cycles}, {amount}")));
    }
    let n = 6 * cycles + 1;
    let mut edges = Vec::with_capacity(7 * cycles);
    for k in 0..cycles {
        let first = 1 + 6 * k;
        edges.push((0, first, amount));
        edges.push((first, first + 1, 2.0 * amount));
        for i in 1..5 {
            edges.push((first + i, first + i + 1, amount));
        }
        edges.push((first + 5, first, amount));
    }
    Ok(network(n, &edges, vec![0.0; n]))
}

/// Core 0, 1, 2 (0 owes 100 to 1 and 2, 1 owes 100 to 2); periphery nodes
/// `3+10k..=12+10k` each owe 20 to core node `k`.
pub fn gen_core_periphery_fixed() -> FinancialNetwork {
    let mut edges = vec![(0, 1, 100.0), (0, 2, 100.0), (1, 2, 100.0)];
    for k in 0..3 {
        for t in 0..10 {
            edges.push((3 + 10 * k + t, k, 20.0));
        }
    }
    network(33, &edges, vec![0.0; 33])
}

/// `2M` nodes; head `i` owes `pbar_head[i]` to tail `M+i`.
pub fn gen_knapsack(pbar_head: &[f64]) -> Result<FinancialNetwork> {
    if pbar_head.is_empty() || pbar_head.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParams("knapsack amounts must be positive".into()));
    }
    let m = pbar_head.len();
    let edges: Vec<_> = pbar_head.iter().enumerate().map(|(i, &a)| (i, m + i, a)).collect();
    Ok(network(2 * m, &edges, vec![0.0; 2 * m]))
}

fn draw(rng: &mut ChaCha8Rng, hi: f64) -> f64 {
    if hi > 0.0 {
        rng.random_range(0.0..hi)
    } else {
        0.0
    }
}

fn check_positive(what: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{what} must be a nonnegative number, got {x}")))
    }
}

pub fn gen_random(spec: &TopologySpec, seed: u64) -> Result<FinancialNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *spec {
        TopologySpec::RandomDense { n, prob, amount_hi, e_hi } => {
            if n == 0 || !(0.0..=1.0).contains(&prob) {
                return Err(Error::InvalidParams(format!("random_dense needs n ≥ 1 and prob in [0,1], got {n}, {prob}")));
            }
            check_positive("amount_hi", amount_hi)?;
            check_positive("e_hi", e_hi)?;
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let hit = rng.random_bool(prob);
                    let amt = draw(&mut rng, amount_hi);
                    if hit && amt > 0.0 {
                        edges.push((i, j, amt));
                    }
                }
            }
            let e = (0..n).map(|_| draw(&mut rng, e_hi)).collect();
            Ok(network(n, &edges, e))
        }
        TopologySpec::RandomCorePeriphery { core, periphery, core_hi, periph_hi, e_hi, core_weight } => {
            if core == 0 {
                return Err(Error::InvalidParams("core must be nonempty".into()));
            }
            check_positive("core_hi", core_hi)?;
            check_positive("periph_hi", periph_hi)?;
            check_positive("e_hi", e_hi)?;
            if !(core_weight > 0.0) {
                return Err(Error::InvalidParams(format!("core weight must be positive, got {core_weight}")));
            }
            let n = core * (1 + periphery);
            let mut edges = Vec::new();
            for i in 0..core {
                for j in 0..core {
                    if i != j {
                        edges.push((i, j, draw(&mut rng, core_hi)));
                    }
                }
            }
            for k in 0..core {
                for t in 0..periphery {
                    edges.push((core + k * periphery + t, k, draw(&mut rng, periph_hi)));
                }
            }
            edges.retain(|x| x.2 > 0.0);
            let e = (0..n).map(|_| draw(&mut rng, e_hi)).collect();
            let mut w = unit(n);
            w[..core].fill(core_weight);
            FinancialNetwork::from_edges(n, &edges, e, w, unit(n))
        }
        TopologySpec::RandomCpChains { core, long_cores, chains, chain_len, core_hi, periph_hi } => {
            if core == 0 || long_cores > core || chain_len == 0 {
                return Err(Error::InvalidParams("chains need a core, long_cores ≤ core and chain_len ≥ 1".into()));
            }
            check_positive("core_hi", core_hi)?;
            check_positive("periph_hi", periph_hi)?;
            let mut edges = Vec::new();
            for i in 0..core {
                for j in 0..core {
                    if i != j {
                        edges.push((i, j, draw(&mut rng, core_hi)));
                    }
                }
            }
            let mut next = core;
            for k in 0..core {
                let len = if k < long_cores { chain_len } else { 1 };
                for _ in 0..chains {
                    let amt = draw(&mut rng, periph_hi);
                    // next is adjacent to the core; each later node owes the previous one
                    edges.push((next, k, amt));
                    for t in 1..len {
                        edges.push((next + t, next + t - 1, amt));
                    }
                    next += len;
                }
            }
            edges.retain(|x| x.2 > 0.0);
            Ok(network(next, &edges, vec![0.0; next]))
        }
        TopologySpec::FullyConnected { n } => {
            if n == 0 {
                return Err(Error::InvalidParams("n must be positive".into()));
            }
            let mut edges = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        edges.push((i, j, draw(&mut rng, 1.0)));
                    }
                }
            }
            edges.retain(|x| x.2 > 0.0);
            let e = (0..n).map(|_| draw(&mut rng, 1.0)).collect();
            Ok(network(n, &edges, e))
        }
        TopologySpec::LinearChain { n } => {
            if n == 0 {
                return Err(Error::InvalidParams("n must be positive".into()));
            }
            let mut edges = Vec::with_capacity(n);
            for i in 0..n.saturating_sub(1) {
                edges.push((i, i + 1, draw(&mut rng, 10.0)));
            }
            edges.retain(|x| x.2 > 0.0);
            let e = (0..n).map(|_| draw(&mut rng, 1.0)).collect();
            Ok(network(n, &edges, e))
        }
        _ => Err(Error::InvalidParams(format!("{} is not a random topology", spec.name()))),
    }
}
