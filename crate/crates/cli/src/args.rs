//! Command-line surface. Everything under [`Command`] is hashed into the
//! result record, so output locations live in [`Output`] instead.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "contagion", version, about = "Clearing, bailout and default-minimization solvers for interbank networks")]
pub struct Cli {
    #[command(flatten)]
    pub output: Output,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Directory for result JSON and CSV tables.
    #[arg(long, global = true, env = "CONTAGION_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Result JSON path; defaults to `<out-dir>/<subcommand>.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Leave the timestamp out so repeated runs write identical bytes.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Generate a network file.
    Gen(GenArgs),
    /// Compute a clearing payment vector.
    Clear(ClearArgs),
    /// Solve a cash-injection problem for a fixed network.
    Bailout(BailoutArgs),
    /// Minimize the number of defaulting nodes under a budget.
    Mindefaults(MinDefaultsArgs),
    /// Allocate cash against random external assets.
    Stochastic(StochasticArgs),
    /// Run the message-passing allocation schedules.
    Distsim(DistsimArgs),
    /// Regenerate a figure or experiment table.
    Reproduce(ReproduceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Clear(_) => "clear",
            Command::Bailout(_) => "bailout",
            Command::Mindefaults(_) => "mindefaults",
            Command::Stochastic(_) => "stochastic",
            Command::Distsim(_) => "distsim",
            Command::Reproduce(_) => "reproduce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    FourNode,
    BinaryTree,
    CycleStar,
    CorePeripheryFixed,
    Knapsack,
    RandomDense,
    RandomCorePeriphery,
    LargeCorePeriphery,
    BenchmarkCorePeriphery,
    RandomCpChains,
    FullyConnected,
    LinearChain,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub topology: Topology,
    /// Tree depth.
    #[arg(long, default_value_t = 10)]
    pub levels: u32,
    /// Number of cycles in the cycle-star network.
    #[arg(long, default_value_t = 100)]
    pub cycles: usize,
    /// Liability on each cycle edge.
    #[arg(long, default_value_t = 10.0)]
    pub amount: f64,
    /// Node count for random-dense, fully-connected and linear-chain.
    #[arg(long)]
    pub n: Option<usize>,
    /// Head liabilities of the knapsack network, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub pbar: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Give every node this weight in the unpaid-liability objective.
    #[arg(long)]
    pub weight: Option<f64>,
    /// Network file to write; defaults to `<out-dir>/network.json`.
    #[arg(long)]
    pub net_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Prop,
    Aon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Fixed-point iteration.
    Fp,
    /// Fictitious default.
    Fd,
    /// Linear program.
    Lp,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NetArgs {
    /// Network JSON file (`{"n", "edges", "e", "w", "s"}`).
    #[arg(long)]
    pub net: PathBuf,
    /// Override every node weight.
    #[arg(long)]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClearArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long, value_enum, default_value_t = Mechanism::Prop)]
    pub mechanism: Mechanism,
    #[arg(long, value_enum, default_value_t = Method::Fp)]
    pub method: Method,
    /// Injected cash per node, comma separated (zero when absent).
    #[arg(long, value_delimiter = ',')]
    pub cash: Vec<f64>,
    /// Also report the threat index of every node.
    #[arg(long)]
    pub threat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    /// Budgeted weighted unpaid liabilities.
    P1,
    /// Cash priced at λ instead of a budget.
    Lagrangian,
    /// Threat-index policy.
    Demange,
    /// Default-weighted mixed-integer program.
    P3,
    /// All-or-nothing payments.
    Aon,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BailoutArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long, value_enum)]
    pub problem: Problem,
    #[arg(long)]
    pub budget: Option<f64>,
    /// Price of cash for the Lagrangian problem.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Probe size for the threat-index policy.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Relative optimality gap for the all-or-nothing program.
    #[arg(long, default_value_t = 1e-6)]
    pub rel_gap: f64,
    /// Branch-and-bound node limit for the all-or-nothing program.
    #[arg(long, default_value_t = 200_000)]
    pub node_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefaultsAlgorithm {
    /// Reweighted ℓ1 minimization.
    Rw,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleTopology {
    BinaryTree,
    CycleStar,
    CorePeripheryFixed,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MinDefaultsArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long, value_enum)]
    pub algorithm: DefaultsAlgorithm,
    #[arg(long)]
    pub budget: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub delta: f64,
    /// Random starts besides the all-ones start.
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also report the exact optimum for a stylized topology
    /// (uses --levels, --cycles and --amount as in `gen`).
    #[arg(long, value_enum)]
    pub oracle: Option<OracleTopology>,
    #[arg(long, default_value_t = 10)]
    pub levels: u32,
    #[arg(long, default_value_t = 100)]
    pub cycles: usize,
    #[arg(long, default_value_t = 10.0)]
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SaaMethod {
    Direct,
    Benders,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Uniform,
    Lognormal,
    /// Always the network's own assets.
    Constant,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StochasticArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long, value_enum)]
    pub method: SaaMethod,
    #[arg(long)]
    pub budget: f64,
    /// Scenario CSV, one row of node assets per scenario. Overrides the sampler
    /// for the direct and Benders methods.
    #[arg(long)]
    pub scenarios: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SamplerKind::Uniform)]
    pub sampler: SamplerKind,
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 2.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    /// Number of sampled scenarios.
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_rounds: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Out-of-sample scenarios for estimating the plan's expected value.
    #[arg(long, default_value_t = 0)]
    pub eval_m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistAlgorithm {
    /// Budget constraint, single loop.
    A,
    /// Fixed cash price.
    APrime,
    /// Budget constraint, proximal two-level loop.
    P,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DistsimArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long, value_enum)]
    pub algorithm: DistAlgorithm,
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    /// Stopping tolerance on both anchors.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 5_000_000)]
    pub max_rounds: usize,
    #[arg(long, default_value_t = 1000)]
    pub trace_every: usize,
    /// Write the sampled iterates to `<out-dir>/distsim_trace.csv`.
    #[arg(long)]
    pub trace_csv: bool,
    /// Per-phase network latency in seconds, for the wall-time estimate.
    #[arg(long, default_value_t = 1e-3)]
    pub latency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Defaults vs budget on the binary tree.
    Fig2,
    /// Defaults vs budget on the cycle-star network.
    Fig4,
    /// Defaults vs budget on the fixed core-periphery network.
    Fig6,
    /// Random networks.
    Fig7,
    /// Random core-periphery networks.
    Fig8,
    /// Random core-periphery networks with chains.
    Fig9,
    /// All-or-nothing program on the 15×70 core-periphery network.
    MilpCp,
    #[value(name = "dist_fourNode")]
    #[serde(rename = "dist_fourNode")]
    DistFourNode,
    DistCp,
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig4 => "fig4",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
            Figure::MilpCp => "milp_cp",
            Figure::DistFourNode => "dist_fourNode",
            Figure::DistCp => "dist_cp",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub figure: Figure,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample networks per budget for the random figures.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Budget grid spacing; each figure has its own default.
    #[arg(long)]
    pub step: Option<f64>,
    /// Record every this many rounds in the distributed traces.
    #[arg(long, default_value_t = 100)]
    pub trace_every: usize,
}
