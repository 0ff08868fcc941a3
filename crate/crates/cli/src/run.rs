use std::path::{Path, PathBuf};

use contagion_core::bailout::*;
use contagion_core::clearing::*;
use contagion_core::defaults_min::*;
use contagion_core::distsim::*;
use contagion_core::generators::*;
use contagion_core::netmodel::NetworkFile;
use contagion_core::stochastic::*;
use contagion_core::{weighted_unpaid, FinancialNetwork};
use contagion_optim::MilpOptions;

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::record::ResultRecord;

/// Runs one subcommand. Tables and network files go under `out_dir`; the
/// caller writes the record itself.
pub fn run(command: &Command, out_dir: &Path) -> CliResult<ResultRecord> {
    let mut rec = ResultRecord::new(command);
    match command {
        Command::Gen(a) => gen(a, out_dir, &mut rec)?,
        Command::Clear(a) => clear(a, &mut rec)?,
        Command::Bailout(a) => bailout(a, &mut rec)?,
        Command::Mindefaults(a) => mindefaults(a, &mut rec)?,
        Command::Stochastic(a) => stochastic(a, &mut rec)?,
        Command::Distsim(a) => distsim(a, out_dir, &mut rec)?,
        Command::Reproduce(a) => crate::reproduce::reproduce(a, out_dir, &mut rec)?,
    }
    Ok(rec)
}

pub fn load_network(args: &NetArgs) -> CliResult<FinancialNetwork> {
    let path = &args.net;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read network {}: {e}", path.display())))?;
    let file: NetworkFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("malformed network {}: {e}", path.display())))?;
    let net = file.into_network()?;
    match args.weight {
        Some(w) => Ok(net.with_weights(vec![w; net.n()])?),
        None => Ok(net),
    }
}

pub fn read_scenarios(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read scenarios {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            // a non-numeric first row is a header
            Err(_) if k == 0 => continue,
            Err(e) => return Err(CliError::Config(format!("{} row {}: {e}", path.display(), k + 1))),
        }
    }
    Ok(rows)
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn need(value: Option<f64>, flag: &str) -> CliResult<f64> {
    value.ok_or_else(|| CliError::Config(format!("--{flag} is required here")))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}

fn cash_vector(net: &FinancialNetwork, cash: &[f64]) -> CliResult<Vec<f64>> {
    match cash.len() {
        0 => Ok(vec![0.0; net.n()]),
        k if k == net.n() => Ok(cash.to_vec()),
        k => Err(CliError::Config(format!("--cash has {k} entries for {} nodes", net.n()))),
    }
}

pub fn topology_spec(a: &GenArgs) -> TopologySpec {
    let or = |n: Option<usize>, d: usize| n.unwrap_or(d);
    match a.topology {
        Topology::FourNode => TopologySpec::CorePeripheryFixed, // unused; handled by the caller
        Topology::BinaryTree => TopologySpec::BinaryTree { levels: a.levels },
        Topology::CycleStar => TopologySpec::CycleStar { cycles: a.cycles, amount: a.amount },
        Topology::CorePeripheryFixed => TopologySpec::CorePeripheryFixed,
        Topology::Knapsack => TopologySpec::Knapsack { pbar_head: a.pbar.clone() },
        Topology::RandomDense => match TopologySpec::random_dense() {
            TopologySpec::RandomDense { n, prob, amount_hi, e_hi } => {
                TopologySpec::RandomDense { n: or(a.n, n), prob, amount_hi, e_hi }
            }
            other => other,
        },
        Topology::RandomCorePeriphery => TopologySpec::random_core_periphery(),
        Topology::LargeCorePeriphery => TopologySpec::large_core_periphery(),
        Topology::BenchmarkCorePeriphery => TopologySpec::benchmark_core_periphery(),
        Topology::RandomCpChains => TopologySpec::random_cp_chains(),
        Topology::FullyConnected => TopologySpec::FullyConnected { n: or(a.n, 200) },
        Topology::LinearChain => TopologySpec::LinearChain { n: or(a.n, 200) },
    }
}

fn gen(a: &GenArgs, out_dir: &Path, rec: &mut ResultRecord) -> CliResult<()> {
    let mut net = if a.topology == Topology::FourNode {
        four_node()
    } else {
        let spec = topology_spec(a);
        rec.op(match spec {
            TopologySpec::BinaryTree { .. } => "gen_binary_tree",
            TopologySpec::CycleStar { .. } => "gen_cycle_star",
            TopologySpec::CorePeripheryFixed => "gen_core_periphery_fixed",
            TopologySpec::Knapsack { .. } => "gen_knapsack",
            _ => "gen_random",
        });
        rec.note("topology", &spec);
        generate(&spec, a.seed)?
    };
    rec.op("build_network");
    if let Some(w) = a.weight {
        net = net.with_weights(vec![w; net.n()])?;
    }
    let path = a.net_out.clone().unwrap_or_else(|| out_dir.join("network.json"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(&path, net.to_json()).map_err(|e| CliError::io(&path, e))?;
    rec.files.push(file_name(&path));
    rec.note("nodes", net.n());
    rec.note("edges", net.num_edges());
    rec.note("total_liabilities", net.pbar().iter().sum::<f64>());
    Ok(())
}

fn method(m: Method) -> ClearingMethod {
    match m {
        Method::Fp => ClearingMethod::fixed_point(),
        Method::Fd => ClearingMethod::FictitiousDefault,
        Method::Lp => ClearingMethod::Lp,
    }
}

fn clear(a: &ClearArgs, rec: &mut ResultRecord) -> CliResult<()> {
    let net = load_network(&a.net)?;
    rec.op("build_network");
    let c = cash_vector(&net, &a.cash)?;
    let r = match a.mechanism {
        Mechanism::Prop => {
            rec.op("clear_proportional");
            clear_proportional(&net, &c, method(a.method))?
        }
        Mechanism::Aon => {
            rec.op("clear_all_or_nothing");
            clear_all_or_nothing(&net, &c, method(a.method))?
        }
    };
    if a.method == Method::Lp {
        rec.op("solve_lp");
    }
    rec.op("weighted_unpaid");
    rec.note("weighted_unpaid", weighted_unpaid(&net, &r.p)?);
    rec.note("total_unpaid", r.total_unpaid());
    if a.threat {
        rec.op("threat_index");
        rec.op("solve_lp");
        rec.note("threat_index", threat_index(&net, &c)?);
    }
    rec.clearing = Some(r);
    Ok(())
}

fn bailout(a: &BailoutArgs, rec: &mut ResultRecord) -> CliResult<()> {
    let net = load_network(&a.net)?;
    rec.op("build_network");
    let (plan, clearing) = match a.problem {
        Problem::P1 => {
            rec.op("solve_problem1");
            rec.op("solve_lp");
            solve_problem1(&net, need(a.budget, "budget")?)?
        }
        Problem::Lagrangian => {
            rec.op("solve_problem1_lagrangian");
            rec.op("solve_lp");
            let lambda = need(a.lambda, "lambda")?;
            let (plan, r) = solve_problem1_lagrangian(&net, lambda)?;
            rec.note("total_cost", plan.objective);
            (plan, r)
        }
        Problem::Demange => {
            rec.op("solve_problem1_demange");
            let delta = a.delta.unwrap_or_else(|| default_probe(&net));
            solve_problem1_demange(&net, need(a.budget, "budget")?, delta)?
        }
        Problem::P3 => {
            rec.op("solve_problem3");
            rec.op("solve_milp");
            let (plan, r, d) = solve_problem3(&net, need(a.budget, "budget")?)?;
            rec.note("d", d);
            (plan, r)
        }
        Problem::Aon => {
            rec.op("solve_problem1_aon");
            rec.op("solve_milp");
            if !(a.rel_gap >= 0.0) {
                return Err(CliError::Config(format!("--rel-gap must be nonnegative, got {}", a.rel_gap)));
            }
            let opts = MilpOptions { rel_gap: a.rel_gap, node_limit: a.node_limit, ..MilpOptions::default() };
            let (plan, r, d) = solve_problem1_aon_with(&net, need(a.budget, "budget")?, &opts)?;
            rec.note("d", d);
            (plan, r)
        }
    };
    rec.converged = plan.meta.converged;
    rec.plan = Some(plan);
    rec.clearing = Some(clearing);
    Ok(())
}

fn oracle_spec(a: &MinDefaultsArgs, which: OracleTopology) -> TopologySpec {
    match which {
        OracleTopology::BinaryTree => TopologySpec::BinaryTree { levels: a.levels },
        OracleTopology::CycleStar => TopologySpec::CycleStar { cycles: a.cycles, amount: a.amount },
        OracleTopology::CorePeripheryFixed => TopologySpec::CorePeripheryFixed,
    }
}

fn mindefaults(a: &MinDefaultsArgs, rec: &mut ResultRecord) -> CliResult<()> {
    let net = load_network(&a.net)?;
    rec.op("build_network");
    let (plan, clearing) = match a.algorithm {
        DefaultsAlgorithm::Rw => {
            rec.op("minimize_defaults_rw");
            rec.op("solve_lp");
            let cfg = ReweightConfig {
                eps: a.eps,
                delta: a.delta,
                random_restarts: a.restarts,
                seed: a.seed,
                max_iters: a.max_iters,
            };
            minimize_defaults_rw(&net, a.budget, &cfg)?
        }
        DefaultsAlgorithm::Greedy => {
            rec.op("minimize_defaults_greedy");
            minimize_defaults_greedy(&net, a.budget)?
        }
    };
    rec.note("n_defaults", clearing.n_defaults);
    if let Some(which) = a.oracle {
        rec.op("oracle_Nd");
        rec.note("oracle_n_defaults", oracle_nd(&oracle_spec(a, which), a.budget)?);
    }
    rec.converged = plan.meta.converged;
    rec.plan = Some(plan);
    rec.clearing = Some(clearing);
    Ok(())
}

fn sampler(a: &StochasticArgs, net: &FinancialNetwork) -> Sampler {
    let n = net.n();
    match a.sampler {
        SamplerKind::Uniform => Sampler::uniform(n, a.lo, a.hi),
        SamplerKind::Lognormal => Sampler::LogNormal { mu: vec![a.mu; n], sigma: vec![a.sigma; n] },
        SamplerKind::Constant => Sampler::Constant { e: net.e().to_vec() },
    }
}

fn stochastic(a: &StochasticArgs, rec: &mut ResultRecord) -> CliResult<()> {
    let net = load_network(&a.net)?;
    rec.op("build_network");
    let sampler = sampler(a, &net);
    let batch = || -> CliResult<ScenarioBatch> {
        match &a.scenarios {
            Some(path) => Ok(ScenarioBatch::new(read_scenarios(path)?, &file_name(path))?),
            None => Ok(ScenarioBatch::sample(&sampler, a.m, a.seed)?),
        }
    };
    let plan = match a.method {
        SaaMethod::Direct => {
            rec.op("solve_saa_direct");
            rec.op("solve_lp");
            let (plan, values) = solve_saa_direct(&net, &batch()?, a.budget)?;
            rec.note("scenario_values", values);
            plan
        }
        SaaMethod::Benders => {
            rec.op("solve_saa_benders");
            rec.op("solve_lp");
            let (plan, state) = solve_saa_benders(&net, &batch()?, a.budget, a.tol, a.max_rounds)?;
            rec.note("gap", state.gap());
            rec.note("rounds", state.rounds);
            rec.note("theta", &state.theta);
            rec.note("lower", &state.lower);
            plan
        }
        SaaMethod::Sgd => {
            rec.op("solve_saa_sgd");
            rec.op("project_simplex");
            let cfg = SgdConfig { iters: a.iters, gamma0: a.gamma0, seed: a.seed };
            let (plan, trace) = solve_saa_sgd(&net, &sampler, a.budget, &cfg)?;
            rec.note("sampled_objective", &trace.sampled_objective);
            plan
        }
    };
    if a.eval_m > 0 {
        let fresh = ScenarioBatch::sample(&sampler, a.eval_m, a.seed.wrapping_add(1))?;
        let (mean, se) = saa_estimate(&net, &fresh, &plan.c)?;
        rec.note("out_of_sample_mean", mean);
        rec.note("out_of_sample_se", se);
    }
    rec.converged = plan.meta.converged;
    rec.clearing = Some(clear_proportional(&net, &plan.c, ClearingMethod::FictitiousDefault)?);
    rec.plan = Some(plan);
    Ok(())
}

pub fn trace_table(trace: &DistTrace) -> (Vec<String>, Vec<Vec<String>>) {
    let n = trace.p.first().map_or(0, Vec::len);
    let mut header = vec!["round".to_string(), "lambda".to_string()];
    for name in ["p", "c", "q"] {
        header.extend((0..n).map(|i| format!("{name}_{i}")));
    }
    let rows = (0..trace.rounds.len())
        .map(|t| {
            let mut row = vec![trace.rounds[t].to_string(), trace.lambda[t].to_string()];
            for v in [&trace.p[t], &trace.c[t], &trace.q[t]] {
                row.extend(v.iter().map(f64::to_string));
            }
            row
        })
        .collect();
    (header, rows)
}

pub fn dist_config(alpha: f64, beta: f64, tol: f64, max_rounds: usize, trace_every: usize) -> DistConfig {
    DistConfig { alpha, beta, tol1: tol, tol2: tol, max_rounds, trace_every, ..DistConfig::default() }
}

fn distsim(a: &DistsimArgs, out_dir: &Path, rec: &mut ResultRecord) -> CliResult<()> {
    let net = load_network(&a.net)?;
    rec.op("build_network");
    let cfg = dist_config(a.alpha, a.beta, a.tol, a.max_rounds, a.trace_every);
    let mut transport = CountingTransport::default();
    let (plan, clearing, trace) = match a.algorithm {
        DistAlgorithm::A => {
            rec.op("run_algorithm_A");
            run_algorithm_a_with(&net, need(a.budget, "budget")?, &cfg, &mut transport)?
        }
        DistAlgorithm::APrime => {
            rec.op("run_algorithm_A_prime");
            run_algorithm_a_prime_with(&net, need(a.lambda, "lambda")?, &cfg, &mut transport)?
        }
        DistAlgorithm::P => {
            rec.op("run_algorithm_P");
            run_algorithm_p(&net, need(a.budget, "budget")?, &cfg)?
        }
    };
    rec.note("rounds", trace.total_rounds);
    rec.note("messages", trace.messages);
    rec.note("bytes", trace.bytes);
    rec.note("latency_estimate_seconds", CountingTransport::latency_estimate(trace.total_rounds, a.latency));
    if !trace.inner_iterations.is_empty() {
        rec.note("inner_iterations", &trace.inner_iterations);
    }
    if a.trace_csv {
        let path: PathBuf = out_dir.join("distsim_trace.csv");
        let (header, rows) = trace_table(&trace);
        write_csv(&path, &header, &rows)?;
        rec.files.push(file_name(&path));
    }
    rec.converged = plan.meta.converged;
    rec.plan = Some(plan);
    rec.clearing = Some(clearing);
    Ok(())
}
