//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Run with
//! `cargo test -p contagion-core --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use contagion_core::bailout::*;
use contagion_core::clearing::*;
use contagion_core::defaults_min::*;
use contagion_core::distsim::*;
use contagion_core::generators::*;
use contagion_core::stochastic::*;
use contagion_core::FinancialNetwork;
use contagion_optim::{project_simplex, solve_lp, LinearProgram, LpStatus, RowKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// pinned tolerances
const EXACT_TOL: f64 = 1e-6;
const METHOD_AGREEMENT_TOL: f64 = 1e-6;
const MILP_GAP: f64 = 1e-4;
const BENDERS_GAP: f64 = 1e-6;
const BENDERS_VS_DIRECT: f64 = 1e-6;
const SGD_REL: f64 = 0.01;
const FD_TOL: f64 = 1e-3;
/// The printed four-node vectors have one decimal; the iterates stop at δ = 1e−6.
const DIST_FOUR_NODE_TOL: f64 = 1e-3;
const DIST_RANDOM_REL: f64 = 1e-5;
const DIST_CP_REL: f64 = 0.02;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

type Outcome = Result<String, String>;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn net045() -> FinancialNetwork {
    four_node().with_weights(vec![0.45; 4]).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let base = clear_proportional(&four_node(), &[0.0; 4], ClearingMethod::fixed_point()).map_err(|e| e.to_string())?;
    ensure!((base.total_unpaid() - 98.0).abs() <= EXACT_TOL, "total unpaid {}", base.total_unpaid());

    let (plan, r) = solve_problem1(&net045(), 15.0).map_err(|e| e.to_string())?;
    ensure!(close(&plan.c, &[0.0, 0.0, 6.0, 9.0], EXACT_TOL), "budgeted c {}", fmt(&plan.c));
    ensure!(close(&r.p, &[76.0, 20.0, 75.0, 10.0], EXACT_TOL), "budgeted p {}", fmt(&r.p));
    ensure!((r.weighted_unpaid - 13.05).abs() <= EXACT_TOL, "W {}", r.weighted_unpaid);

    let (lag, lr) = solve_problem1_lagrangian(&net045(), 1.0).map_err(|e| e.to_string())?;
    ensure!(close(&lag.c, &[0.0, 0.0, 8.5, 9.0], EXACT_TOL), "lagrangian c {}", fmt(&lag.c));
    ensure!(close(&lr.p, &[81.0, 20.0, 80.0, 10.0], EXACT_TOL), "lagrangian p {}", fmt(&lr.p));
    ensure!((lag.objective - 26.05).abs() <= EXACT_TOL, "cost {}", lag.objective);
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(format!("unpaid 98, W 13.05, cost {:.6} in {took:.2?}", lag.objective))
}

/// The piecewise default-count formulas, written out independently of the
/// library's oracle.
fn formula(spec: &TopologySpec, c: f64) -> usize {
    match *spec {
        TopologySpec::BinaryTree { levels } => {
            let t = |x: u32| (1usize << (x - 1)) - 1;
            if c < 8.0 {
                t(levels)
            } else if c >= 2f64.powi(levels as i32 + 1) {
                0
            } else {
                let digits = format!("{:b}", c.floor() as u64);
                let saved: usize = digits
                    .chars()
                    .rev()
                    .enumerate()
                    .filter(|&(k, d)| d == '1' && k + 1 >= 4)
                    .map(|(k, _)| t(k as u32 + 1 - 2))
                    .sum();
                t(levels) - saved
            }
        }
        TopologySpec::CycleStar { cycles, amount } => {
            if c < amount {
                cycles + 1
            } else if c < amount * cycles as f64 {
                cycles + 1 - (c / amount).floor() as usize
            } else {
                0
            }
        }
        TopologySpec::CorePeripheryFixed => {
            let k = (c / 20.0).floor() as usize;
            if c < 100.0 {
                32 - k
            } else if c < 200.0 {
                31 - k
            } else if c < 600.0 {
                30 - k
            } else {
                0
            }
        }
        _ => unreachable!(),
    }
}

fn around(points: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = points.into_iter().flat_map(|x| [x - 1.0, x, x + 1.0]).filter(|x| *x >= 0.0).collect();
    out.push(0.0);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn heuristic_grid(net: &FinancialNetwork, spec: &TopologySpec, grid: &[f64], report: &mut Vec<String>) -> Result<Vec<usize>, String> {
    let base = clear_proportional(net, &vec![0.0; net.n()], ClearingMethod::FictitiousDefault).map_err(|e| e.to_string())?;
    let cfg = ReweightConfig::default();
    let mut greedy = Vec::new();
    let (mut rw_gap, mut g_gap) = (0usize, 0usize);
    for &c in grid {
        let oracle = oracle_nd(spec, c).map_err(|e| e.to_string())?;
        let (_, rw) = minimize_defaults_rw(net, c, &cfg).map_err(|e| e.to_string())?;
        let (_, gr) = minimize_defaults_greedy(net, c).map_err(|e| e.to_string())?;
        for (name, nd) in [("reweighted", rw.n_defaults), ("greedy", gr.n_defaults)] {
            ensure!(nd >= oracle, "{} C={c}: {name} N_d {nd} below oracle {oracle}", spec.name());
            ensure!(nd <= base.n_defaults, "{} C={c}: {name} N_d {nd} above no-injection {}", spec.name(), base.n_defaults);
        }
        rw_gap += rw.n_defaults - oracle;
        g_gap += gr.n_defaults - oracle;
        greedy.push(gr.n_defaults);
    }
    report.push(format!("{} excess defaults over {} points: reweighted {rw_gap}, greedy {g_gap}", spec.name(), grid.len()));
    Ok(greedy)
}

fn criterion_2() -> Outcome {
    let tree = TopologySpec::BinaryTree { levels: 10 };
    let cycles = TopologySpec::CycleStar { cycles: 100, amount: 10.0 };
    let cp = TopologySpec::CorePeripheryFixed;

    let tree_points = around((3..=11).map(|k| 2f64.powi(k)).chain([24.0, 100.0, 1000.0]));
    let cycle_points = around((1..=100).map(|k| 10.0 * k as f64));
    let cp_points = around((1..=31).map(|k| 20.0 * k as f64));
    let mut checked = 0;
    for (spec, points) in [(&tree, &tree_points), (&cycles, &cycle_points), (&cp, &cp_points)] {
        for &c in points {
            let got = oracle_nd(spec, c).map_err(|e| e.to_string())?;
            ensure!(got == formula(spec, c), "{} oracle at C={c}: {got} vs {}", spec.name(), formula(spec, c));
            checked += 1;
        }
    }

    let mut report = Vec::new();
    let tree_net = gen_binary_tree(10).map_err(|e| e.to_string())?;
    let tree_grid: Vec<f64> = tree_points.iter().copied().filter(|c| *c <= 2048.0).collect();
    let tree_greedy = heuristic_grid(&tree_net, &tree, &tree_grid, &mut report)?;
    let at16 = tree_grid.iter().position(|c| *c == 16.0).expect("16 is on the grid");
    ensure!(tree_greedy[at16] > formula(&tree, 16.0), "greedy is optimal on the tree at C=16");

    let cycle_net = gen_cycle_star(100, 10.0).map_err(|e| e.to_string())?;
    let cycle_grid: Vec<f64> = (0..=100).map(|k| 10.0 * k as f64).collect();
    let cycle_greedy = heuristic_grid(&cycle_net, &cycles, &cycle_grid, &mut report)?;
    for (&c, &nd) in cycle_grid.iter().zip(&cycle_greedy) {
        let oracle = formula(&cycles, c);
        if c == 1000.0 {
            ensure!(nd != oracle, "greedy matches the oracle at C=1000");
        } else {
            ensure!(nd == oracle, "greedy {nd} vs oracle {oracle} at C={c}");
        }
    }

    let cp_net = gen_core_periphery_fixed();
    let cp_grid: Vec<f64> = (0..=70).map(|k| 10.0 * k as f64).collect();
    heuristic_grid(&cp_net, &cp, &cp_grid, &mut report)?;
    Ok(format!("{checked} oracle points; {}", report.join("; ")))
}

fn criterion_3() -> Outcome {
    let specs = [
        TopologySpec::FullyConnected { n: 200 },
        TopologySpec::benchmark_core_periphery(),
        TopologySpec::LinearChain { n: 200 },
    ];
    let methods = [ClearingMethod::fixed_point(), ClearingMethod::FictitiousDefault, ClearingMethod::Lp];
    let mut report = Vec::new();
    for spec in &specs {
        let mut times = [Duration::ZERO; 3];
        let mut worst: f64 = 0.0;
        for seed in 0..100 {
            let net = generate(spec, seed).map_err(|e| e.to_string())?;
            let zero = vec![0.0; net.n()];
            let mut results = Vec::new();
            for (k, m) in methods.iter().enumerate() {
                let t = Instant::now();
                let r = clear_proportional(&net, &zero, *m).map_err(|e| e.to_string())?;
                times[k] += t.elapsed();
                results.push(r.p);
            }
            for r in &results[1..] {
                let d = r.iter().zip(&results[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst = worst.max(d);
            }
        }
        ensure!(worst <= METHOD_AGREEMENT_TOL, "{}: methods differ by {worst:e}", spec.name());
        ensure!(times[0] < times[1] && times[0] < times[2], "{}: fixed point not fastest {times:?}", spec.name());
        report.push(format!(
            "{} fp {:.3?} fd {:.3?} lp {:.3?} max diff {worst:.1e}",
            spec.name(),
            times[0],
            times[1],
            times[2]
        ));
    }
    Ok(report.join("; "))
}

fn brute_knapsack(values: &[f64], cap: f64) -> f64 {
    let m = values.len();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << m) {
        let total: f64 = (0..m).filter(|k| mask >> k & 1 == 1).map(|k| values[k]).sum();
        if total <= cap {
            best = best.max(total);
        }
    }
    best
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut solved = 0;
    for m in [4usize, 8, 12, 15] {
        let heads: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..10.0)).collect();
        let net = gen_knapsack(&heads).map_err(|e| e.to_string())?;
        let total: f64 = heads.iter().sum();
        for k in 0..20 {
            let cap = total * k as f64 / 19.0;
            let best = brute_knapsack(&heads, cap);
            let (plan, r, _) = solve_problem1_aon(&net, cap, 1e-9).map_err(|e| e.to_string())?;
            let expect = total - best;
            ensure!(
                (r.weighted_unpaid - expect).abs() <= 1e-9 * (1.0 + expect),
                "M={m} C={cap}: W {} vs brute force {expect}",
                r.weighted_unpaid
            );
            ensure!(plan.total() <= cap + 1e-8, "budget exceeded");
            solved += 1;
        }
    }

    // one sample of the 15-core network at a budget above the core's deficit
    let budget = 200.0;
    let big = generate(&TopologySpec::large_core_periphery(), 1).map_err(|e| e.to_string())?;
    let (plan, _, _) = solve_problem1_aon(&big, budget, MILP_GAP).map_err(|e| e.to_string())?;
    let gap = plan.meta.gap.unwrap_or(f64::INFINITY);
    ensure!(gap <= MILP_GAP, "reported gap {gap:e}");
    // independent certificate: re-clear the plan and compare with the LP relaxation
    let realized = reclear_all_or_nothing(&big, &plan.c).map_err(|e| e.to_string())?.weighted_unpaid;
    let relax = solve_lp(&all_or_nothing_program(&big, budget).lp).map_err(|e| e.to_string())?;
    ensure!(relax.status == LpStatus::Optimal, "relaxation {:?}", relax.status);
    let lower = -relax.objective;
    let certified = (realized - lower) / realized;
    ensure!(certified <= MILP_GAP, "certified gap {certified:e} (W {realized}, bound {lower})");
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(60), "took {took:?}");

    // below the core deficit the relaxation is weak; report only
    let hard = solve_problem1_aon_with(
        &big,
        100.0,
        &contagion_optim::MilpOptions { rel_gap: MILP_GAP, node_limit: 200, ..Default::default() },
    );
    let note = match hard {
        Ok((p, _, _)) => format!("C=100 gap {:.1e}", p.meta.gap.unwrap_or(f64::NAN)),
        Err(e) => format!("C=100 uncertified after 200 nodes ({e})"),
    };
    Ok(format!(
        "{solved} knapsack budgets exact; core-periphery C={budget} W {realized:.4} certified gap {certified:.1e} in {took:.1?}; info: {note}"
    ))
}

fn random_ten(seed: u64) -> FinancialNetwork {
    generate(&TopologySpec::RandomDense { n: 10, prob: 0.5, amount_hi: 10.0, e_hi: 1.0 }, seed).unwrap()
}

fn clear_w(net: &FinancialNetwork, e: &[f64], c: &[f64]) -> (f64, Vec<usize>) {
    let shifted = net.with_assets(e.to_vec()).unwrap();
    let r = clear_proportional(&shifted, c, ClearingMethod::FictitiousDefault).unwrap();
    (r.weighted_unpaid, r.defaults)
}

fn criterion_5() -> Outcome {
    let net = random_ten(7);
    let budget = 5.0;
    let batch = ScenarioBatch::sample(&Sampler::uniform(10, 0.0, 2.0), 50, 11).map_err(|e| e.to_string())?;
    let (direct, _) = solve_saa_direct(&net, &batch, budget).map_err(|e| e.to_string())?;
    let (benders, state) = solve_saa_benders(&net, &batch, budget, 1e-10, 1000).map_err(|e| e.to_string())?;
    ensure!(state.converged && state.gap() <= BENDERS_GAP, "Benders gap {:e}", state.gap());
    ensure!(
        (direct.objective - benders.objective).abs() <= BENDERS_VS_DIRECT,
        "direct {} vs Benders {}",
        direct.objective,
        benders.objective
    );

    let (opt, _) = solve_problem1(&net, budget).map_err(|e| e.to_string())?;
    let sampler = Sampler::Constant { e: net.e().to_vec() };
    let (sgd, _) = solve_saa_sgd(&net, &sampler, budget, &SgdConfig { iters: 2000, ..SgdConfig::default() })
        .map_err(|e| e.to_string())?;
    let (w_sgd, _) = clear_w(&net, net.e(), &sgd.c);
    ensure!(w_sgd <= opt.objective * (1.0 + SGD_REL), "SGD W {w_sgd} vs optimum {}", opt.objective);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked, mut tried) = (0, 0);
    let h = 1e-5;
    while checked < 20 {
        tried += 1;
        ensure!(tried < 2000, "too few non-degenerate points");
        let e: Vec<f64> = (0..10).map(|_| rng.random_range(0.0..2.0)).collect();
        let raw: Vec<f64> = (0..10).map(|_| rng.random_range(0.0..1.0)).collect();
        let c = project_simplex(&raw, budget);
        let (_, base) = clear_w(&net, &e, &c);
        let mut stable = true;
        let mut fd = vec![0.0; 10];
        for k in 0..10 {
            let mut up = c.clone();
            up[k] += h;
            let mut down = c.clone();
            down[k] = (down[k] - h).max(0.0);
            let (wu, du) = clear_w(&net, &e, &up);
            let (wd, dd) = clear_w(&net, &e, &down);
            stable &= du == base && dd == base;
            fd[k] = (wu - wd) / (up[k] - down[k]);
        }
        if !stable {
            continue;
        }
        let (_, grad) = scenario_gradient(&net, &e, &c).map_err(|e| e.to_string())?;
        ensure!(close(&grad, &fd, FD_TOL), "gradient {} vs finite differences {}", fmt(&grad), fmt(&fd));
        checked += 1;
    }
    Ok(format!(
        "Benders {} rounds gap {:.1e}, |direct - Benders| {:.1e}; SGD W {:.6} vs {:.6}; {checked} gradient checks ({tried} points tried)",
        state.rounds,
        state.gap(),
        (direct.objective - benders.objective).abs(),
        w_sgd,
        opt.objective
    ))
}

fn criterion_6() -> Outcome {
    let cfg = DistConfig { alpha: 0.1, beta: 0.1, tol1: 1e-6, tol2: 1e-6, ..DistConfig::default() };
    let (plan, r, trace) = run_algorithm_a_prime(&net045(), 1.0, &cfg).map_err(|e| e.to_string())?;
    ensure!(plan.meta.converged, "Lagrangian schedule did not stop");
    ensure!(close(&plan.c, &[0.0, 0.0, 8.5, 9.0], DIST_FOUR_NODE_TOL), "c {}", fmt(&plan.c));
    ensure!(close(&r.p, &[81.0, 20.0, 80.0, 10.0], DIST_FOUR_NODE_TOL), "p {}", fmt(&r.p));
    ensure!((plan.objective - 26.05).abs() <= DIST_FOUR_NODE_TOL, "cost {}", plan.objective);
    let four_rounds = trace.total_rounds;

    let (bplan, br, _) = run_algorithm_a(&net045(), 15.0, &cfg).map_err(|e| e.to_string())?;
    ensure!(close(&bplan.c, &[0.0, 0.0, 6.0, 9.0], DIST_FOUR_NODE_TOL), "budgeted c {}", fmt(&bplan.c));
    ensure!(close(&br.p, &[76.0, 20.0, 75.0, 10.0], DIST_FOUR_NODE_TOL), "budgeted p {}", fmt(&br.p));

    let fine = DistConfig { alpha: 0.01, beta: 0.01, tol1: 1e-8, tol2: 1e-8, ..DistConfig::default() };
    let mut worst: f64 = 0.0;
    let mut rounds = Vec::new();
    for seed in 0..10 {
        let net = random_ten(seed);
        let (exact, _) = solve_problem1(&net, 5.0).map_err(|e| e.to_string())?;
        let (plan, _, trace) = run_algorithm_a(&net, 5.0, &fine).map_err(|e| e.to_string())?;
        let rel = (plan.objective - exact.objective).abs() / exact.objective.abs().max(1e-12);
        ensure!(plan.meta.converged, "seed {seed} hit the round cap");
        ensure!(rel <= DIST_RANDOM_REL, "seed {seed}: W {} vs {}", plan.objective, exact.objective);
        worst = worst.max(rel);
        rounds.push(trace.total_rounds);
    }

    let cp = generate(&TopologySpec::random_core_periphery(), 3).map_err(|e| e.to_string())?;
    let cp = cp.with_weights(vec![0.3; cp.n()]).map_err(|e| e.to_string())?;
    let (exact, _) = solve_problem1_lagrangian(&cp, 1.0).map_err(|e| e.to_string())?;
    let coarse = DistConfig { alpha: 0.01, beta: 0.01, tol1: 1e-3, tol2: 1e-3, ..DistConfig::default() };
    let (plan, _, trace) = run_algorithm_a_prime(&cp, 1.0, &coarse).map_err(|e| e.to_string())?;
    let cp_rel = (plan.objective - exact.objective).abs() / exact.objective;
    ensure!(cp_rel <= DIST_CP_REL, "core-periphery cost {} vs {}", plan.objective, exact.objective);
    let mean = rounds.iter().sum::<usize>() as f64 / rounds.len() as f64;
    Ok(format!(
        "four-node {four_rounds} rounds; random worst rel err {worst:.1e}, mean {mean:.0} rounds; core-periphery rel err {cp_rel:.1e} in {} rounds ({} messages)",
        trace.total_rounds, trace.messages
    ))
}

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.random_range(2..15);
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        lp.set_objective(j, rng.random_range(-1.0..3.0));
        lp.set_bounds(j, 0.0, rng.random_range(1.0..10.0));
    }
    for _ in 0..rng.random_range(1..12) {
        let mut row = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.5) {
                row.push((j, rng.random_range(-1.0..2.0)));
            }
        }
        lp.add_le(row, rng.random_range(0.0..10.0));
    }
    lp
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut parts = Vec::new();

    // strong duality
    for _ in 0..300 {
        let lp = random_lp(&mut rng);
        let sol = solve_lp(&lp).map_err(|e| e.to_string())?;
        ensure!(sol.status == LpStatus::Optimal, "box LP not optimal");
        let dual = sol.dual_objective(&lp);
        ensure!((sol.objective - dual).abs() <= 1e-7 * (1.0 + sol.objective.abs()), "duality gap {} vs {dual}", sol.objective);
        for (row, y) in lp.rows().iter().zip(&sol.duals) {
            ensure!(row.kind != RowKind::Le || *y >= -1e-9, "negative dual {y}");
        }
    }
    parts.push("duality 300");

    // simplex projection
    for _ in 0..500 {
        let n = rng.random_range(1..20);
        let cap = rng.random_range(0.0..10.0);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let pa = project_simplex(&a, cap);
        let pb = project_simplex(&b, cap);
        ensure!((pa.iter().sum::<f64>() - cap).abs() <= 1e-10 && pa.iter().all(|x| *x >= 0.0), "projection off the simplex");
        // KKT: a_i − pa_i equals a common shift on the support and bounds it elsewhere
        let shifts: Vec<f64> = (0..n).filter(|&i| pa[i] > 0.0).map(|i| a[i] - pa[i]).collect();
        if let Some(&s0) = shifts.first() {
            ensure!(shifts.iter().all(|s| (s - s0).abs() <= 1e-9), "unequal shifts");
            ensure!((0..n).filter(|&i| pa[i] == 0.0).all(|i| a[i] <= s0 + 1e-9), "zero entry above the shift");
        }
        ensure!(close(&project_simplex(&pa, cap), &pa, 1e-12), "not idempotent");
        let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        ensure!(d(&pa, &pb) <= d(&a, &b) + 1e-12, "expansive");
    }
    parts.push("projection 500");

    // monotone clearing
    for seed in 0..60 {
        let net = generate(&TopologySpec::random_dense(), seed).map_err(|e| e.to_string())?;
        let e: Vec<f64> = (0..net.n()).map(|_| rng.random_range(0.0..1.0)).collect();
        let more: Vec<f64> = e.iter().map(|x| x + rng.random_range(0.0..1.0)).collect();
        let zero = vec![0.0; net.n()];
        let lo = clear_proportional(&net.with_assets(e).unwrap(), &zero, ClearingMethod::FictitiousDefault).unwrap();
        let hi = clear_proportional(&net.with_assets(more).unwrap(), &zero, ClearingMethod::FictitiousDefault).unwrap();
        ensure!(hi.p.iter().zip(&lo.p).all(|(a, b)| *a >= b - 1e-8), "clearing not monotone (seed {seed})");
    }
    parts.push("monotonicity 60");

    // value function convex and nonincreasing in the budget
    for net in [four_node(), random_ten(1), generate(&TopologySpec::random_core_periphery(), 2).unwrap()] {
        let total: f64 = net.pbar().iter().sum();
        let values: Vec<f64> = (0..=30)
            .map(|k| solve_problem1(&net, total * k as f64 / 60.0).map(|(p, _)| p.objective))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for k in 1..values.len() {
            ensure!(values[k] <= values[k - 1] + 1e-8, "W*(C) increased");
        }
        for k in 1..values.len() - 1 {
            ensure!(values[k - 1] - 2.0 * values[k] + values[k + 1] >= -1e-7, "W*(C) not convex at {k}");
        }
    }
    parts.push("W*(C) convexity 3 networks");

    // every Benders cut bounds the scenario values from above
    let net = random_ten(3);
    let batch = ScenarioBatch::sample(&Sampler::uniform(10, 0.0, 2.0), 10, 3).unwrap();
    let (_, state) = solve_saa_benders(&net, &batch, 5.0, 1e-9, 500).map_err(|e| e.to_string())?;
    let full: f64 = net.w().iter().zip(net.pbar()).map(|(a, b)| a * b).sum();
    for _ in 0..100 {
        let raw: Vec<f64> = (0..10).map(|_| rng.random_range(0.0..1.0)).collect();
        let c = project_simplex(&raw, rng.random_range(0.0..5.0));
        let value: f64 = batch.scenarios.iter().map(|e| full - clear_w(&net, e, &c).0).sum();
        for cut in &state.cuts {
            ensure!(cut.evaluate(&c) >= value - 1e-7, "cut below the value: {} < {value}", cut.evaluate(&c));
        }
    }
    parts.push("Benders cuts");

    // default indicators of the default-weighted program
    for seed in 0..15 {
        let net = generate(&TopologySpec::RandomDense { n: 8, prob: 0.4, amount_hi: 5.0, e_hi: 1.0 }, seed).unwrap();
        let (_, r, d) = solve_problem3(&net, rng.random_range(0.0..5.0)).map_err(|e| e.to_string())?;
        for i in 0..net.n() {
            ensure!(d[i] == (net.pbar()[i] - r.p[i] > 1e-7 * net.pbar()[i].max(1.0)), "indicator {i} (seed {seed})");
        }
    }
    parts.push("indicators 15");

    // message schema
    let net = net045();
    let mut transport = CountingTransport::with_log(usize::MAX);
    run_algorithm_a_with(&net, 15.0, &DistConfig::default(), &mut transport).map_err(|e| e.to_string())?;
    for (_, m) in &transport.log {
        match *m {
            Message::PaymentToCreditor { from, to, amount } => {
                ensure!(net.creditors(from).contains(&to), "payment to a non-creditor");
                ensure!(amount <= net.liability(from, to) + 1e-12, "payment above the claim");
            }
            Message::PriceToBorrower { from, to, .. } => ensure!(net.borrowers(from).contains(&to), "price to a non-borrower"),
            Message::CashToCentral { .. } | Message::StopBit { .. } | Message::LambdaBroadcast { .. } => {}
        }
    }
    ensure!(transport.messages == transport.log.len() as u64, "unlogged messages");
    parts.push("message schema");
    Ok(parts.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("four-node exact reproduction", criterion_1),
        ("closed-form default oracles", criterion_2),
        ("clearing cross-validation", criterion_3),
        ("all-or-nothing MILP vs brute force", criterion_4),
        ("stochastic consistency", criterion_5),
        ("distributed convergence", criterion_6),
        ("property suites", criterion_7),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {} {name}: {detail} [{took:.1?}]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} {name}: {detail} [{took:.1?}]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
