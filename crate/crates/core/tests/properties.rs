use contagion_core::bailout::*;
use contagion_core::clearing::*;
use contagion_core::defaults_min::*;
use contagion_core::distsim::*;
use contagion_core::generators::*;
use contagion_core::stochastic::*;
use contagion_core::FinancialNetwork;
use contagion_optim::project_simplex;
use proptest::prelude::*;

fn small_net(seed: u64, n: usize, e_hi: f64) -> FinancialNetwork {
    generate(&TopologySpec::RandomDense { n, prob: 0.4, amount_hi: 10.0, e_hi }, seed).unwrap()
}

fn cash(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..3.0f64, n)
}

fn with_e(net: &FinancialNetwork, e: &[f64]) -> FinancialNetwork {
    net.with_assets(e.to_vec()).unwrap()
}

fn weighted(net: &FinancialNetwork, c: &[f64]) -> f64 {
    clear_proportional(net, c, ClearingMethod::FictitiousDefault).unwrap().weighted_unpaid
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn clearing_vector_is_a_fixed_point(seed in 0u64..10_000, n in 2usize..25, c in cash(25)) {
        let net = small_net(seed, n, 2.0);
        let c = &c[..n];
        for m in [ClearingMethod::fixed_point(), ClearingMethod::FictitiousDefault, ClearingMethod::Lp] {
            let r = clear_proportional(&net, c, m).unwrap();
            let inflow = net.inflow(&r.p);
            for i in 0..n {
                let target = net.pbar()[i].min(inflow[i] + net.e()[i] + c[i]);
                prop_assert!((r.p[i] - target).abs() <= 1e-7 * net.pbar()[i].max(1.0));
                prop_assert!(r.surplus[i] >= -1e-7 * net.pbar()[i].max(1.0));
            }
        }
    }

    #[test]
    fn clearing_methods_agree(seed in 0u64..10_000, n in 2usize..40) {
        let net = small_net(seed, n, 1.0);
        let zero = vec![0.0; n];
        let a = clear_proportional(&net, &zero, ClearingMethod::fixed_point()).unwrap();
        let b = clear_proportional(&net, &zero, ClearingMethod::FictitiousDefault).unwrap();
        let l = clear_proportional(&net, &zero, ClearingMethod::Lp).unwrap();
        prop_assert!(b.iterations <= n + 1);
        for i in 0..n {
            prop_assert!((a.p[i] - b.p[i]).abs() <= 1e-6);
            prop_assert!((l.p[i] - b.p[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn all_or_nothing_payments_are_all_or_nothing(seed in 0u64..10_000, n in 2usize..15, c in cash(15)) {
        let net = small_net(seed, n, 2.0);
        let r = clear_all_or_nothing(&net, &c[..n], ClearingMethod::FictitiousDefault).unwrap();
        for i in 0..n {
            prop_assert!(r.p[i] == 0.0 || r.p[i] == net.pbar()[i]);
        }
    }

    #[test]
    fn budgeted_plan_respects_budget_and_reclears(seed in 0u64..10_000, n in 2usize..15, budget in 0.0..20.0f64) {
        let net = small_net(seed, n, 1.0);
        let (plan, r) = solve_problem1(&net, budget).unwrap();
        prop_assert!(plan.total() <= budget + 1e-8);
        prop_assert!(plan.c.iter().all(|x| *x >= 0.0));
        prop_assert!((weighted(&net, &plan.c) - plan.objective).abs() <= 1e-6 * (1.0 + plan.objective));
        prop_assert!((r.weighted_unpaid - plan.objective).abs() <= 1e-6 * (1.0 + plan.objective));
    }

    #[test]
    fn value_function_is_monotone_and_convex(seed in 0u64..10_000, n in 2usize..12, step in 0.5..5.0f64) {
        let net = small_net(seed, n, 1.0);
        let w: Vec<f64> = (0..4).map(|k| solve_problem1(&net, step * k as f64).unwrap().0.objective).collect();
        for k in 1..4 {
            prop_assert!(w[k] <= w[k - 1] + 1e-8);
        }
        for k in 1..3 {
            prop_assert!(w[k - 1] - 2.0 * w[k] + w[k + 1] >= -1e-7);
        }
    }

    #[test]
    fn lagrangian_cost_is_consistent(seed in 0u64..10_000, n in 2usize..12, lambda in 0.05..2.0f64) {
        let net = small_net(seed, n, 1.0);
        let (plan, r) = solve_problem1_lagrangian(&net, lambda).unwrap();
        let total = plan.total();
        prop_assert!((plan.objective - (lambda * total + r.weighted_unpaid)).abs() <= 1e-6 * (1.0 + plan.objective));
        // never worse than injecting nothing, and no better than the budgeted optimum at the same spend
        prop_assert!(plan.objective <= weighted(&net, &vec![0.0; n]) + 1e-7);
        let (budgeted, _) = solve_problem1(&net, total).unwrap();
        prop_assert!((budgeted.objective - r.weighted_unpaid).abs() <= 1e-5 * (1.0 + budgeted.objective));
    }

    #[test]
    fn default_indicators_match_payments(seed in 0u64..10_000, n in 2usize..9, budget in 0.0..6.0f64) {
        let net = small_net(seed, n, 1.0);
        let (plan, r, d) = solve_problem3(&net, budget).unwrap();
        prop_assert!(plan.total() <= budget + 1e-8);
        for i in 0..n {
            prop_assert_eq!(d[i], r.defaults.contains(&i));
        }
    }

    #[test]
    fn heuristics_stay_within_bounds(seed in 0u64..10_000, n in 2usize..15, budget in 0.0..15.0f64) {
        let net = small_net(seed, n, 1.0);
        let base = clear_proportional(&net, &vec![0.0; n], ClearingMethod::FictitiousDefault).unwrap().n_defaults;
        let cfg = ReweightConfig { random_restarts: 1, ..ReweightConfig::default() };
        let (rw, rr) = minimize_defaults_rw(&net, budget, &cfg).unwrap();
        let (gp, gr) = minimize_defaults_greedy(&net, budget).unwrap();
        prop_assert!(rr.n_defaults <= base && gr.n_defaults <= base);
        prop_assert!(rw.total() <= budget + 1e-8 && gp.total() <= budget + 1e-8);
    }

    #[test]
    fn greedy_accounts_for_every_unit(seed in 0u64..10_000, n in 2usize..15, budget in 0.0..15.0f64) {
        let net = small_net(seed, n, 1.0);
        let (plan, _, steps) = minimize_defaults_greedy_traced(&net, budget).unwrap();
        let last = steps.last().unwrap();
        prop_assert!((plan.total() + last.remaining - budget).abs() <= 1e-8 * (1.0 + budget));
        let injected: f64 = steps.iter().map(|s| s.injected).sum();
        let recycled: f64 = steps.iter().map(|s| s.recycled).sum();
        prop_assert!((injected - recycled - plan.total()).abs() <= 1e-8 * (1.0 + budget));
    }

    #[test]
    fn scenario_gradient_is_a_subgradient(seed in 0u64..10_000, e in cash(10), a in cash(10), b in cash(10)) {
        let net = small_net(seed, 10, 0.0);
        let ca = project_simplex(&a, 4.0);
        let cb = project_simplex(&b, 4.0);
        let (wa, g) = scenario_gradient(&net, &e, &ca).unwrap();
        let wb = weighted(&with_e(&net, &e), &cb);
        let lin: f64 = g.iter().zip(cb.iter().zip(&ca)).map(|(g, (x, y))| g * (x - y)).sum();
        prop_assert!(wb >= wa + lin - 1e-7 * (1.0 + wa));
        prop_assert!(g.iter().all(|x| *x <= 1e-12));
    }

    #[test]
    fn saa_estimate_is_the_scenario_mean(seed in 0u64..10_000, m in 1usize..12, c in cash(10)) {
        let net = small_net(seed, 10, 0.0);
        let batch = ScenarioBatch::sample(&Sampler::uniform(10, 0.0, 2.0), m, seed).unwrap();
        let (mean, se) = saa_estimate(&net, &batch, &c).unwrap();
        let direct: f64 = batch.scenarios.iter().map(|e| weighted(&with_e(&net, e), &c)).sum::<f64>() / m as f64;
        prop_assert!((mean - direct).abs() <= 1e-7 * (1.0 + direct));
        prop_assert!(se >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn benders_cuts_never_cut_off_the_value(seed in 0u64..10_000, probes in prop::collection::vec(cash(10), 10)) {
        let net = small_net(seed, 10, 0.0);
        let batch = ScenarioBatch::sample(&Sampler::uniform(10, 0.0, 2.0), 6, seed).unwrap();
        let (plan, state) = solve_saa_benders(&net, &batch, 4.0, 1e-9, 500).unwrap();
        let (direct, _) = solve_saa_direct(&net, &batch, 4.0).unwrap();
        prop_assert!((plan.objective - direct.objective).abs() <= 1e-6 * (1.0 + direct.objective));
        let full: f64 = net.w().iter().zip(net.pbar()).map(|(a, b)| a * b).sum();
        for raw in &probes {
            let c = project_simplex(raw, 4.0);
            let value: f64 = batch.scenarios.iter().map(|e| full - weighted(&with_e(&net, e), &c)).sum();
            for cut in &state.cuts {
                prop_assert!(cut.evaluate(&c) >= value - 1e-7 * (1.0 + value));
            }
        }
    }

    #[test]
    fn distributed_iterates_stay_feasible(seed in 0u64..10_000, budget in 0.0..6.0f64) {
        let net = small_net(seed, 6, 1.0);
        let cfg = DistConfig { trace_every: 1, max_rounds: 3000, ..DistConfig::default() };
        let (_, _, trace) = run_algorithm_a(&net, budget, &cfg).unwrap();
        for t in 0..trace.rounds.len() {
            prop_assert!(trace.lambda[t] >= 0.0);
            for i in 0..6 {
                prop_assert!(trace.q[t][i] >= 0.0);
                prop_assert!(trace.c[t][i] >= 0.0);
                prop_assert!(trace.p[t][i] >= 0.0 && trace.p[t][i] <= net.pbar()[i]);
            }
        }
    }

    #[test]
    fn stopping_bits_mean_small_anchor_moves(seed in 0u64..10_000, budget in 0.0..6.0f64) {
        let net = small_net(seed, 6, 1.0);
        let cfg = DistConfig { trace_every: 1, ..DistConfig::default() };
        let (plan, _, trace) = run_algorithm_a(&net, budget, &cfg).unwrap();
        prop_assert!(plan.meta.converged);
        let k = trace.rounds.len();
        prop_assert!(k >= 2);
        for i in 0..6 {
            prop_assert!((trace.y_tilde[k - 1][i] - trace.y_tilde[k - 2][i]).abs() < cfg.tol1);
            prop_assert!((trace.z_tilde[k - 1][i] - trace.z_tilde[k - 2][i]).abs() < cfg.tol2);
        }
    }
}

#[test]
fn distributed_budget_schedule_converges_on_random_networks() {
    let cfg = DistConfig { tol1: 1e-7, tol2: 1e-7, ..DistConfig::default() };
    for seed in 0..20 {
        let net = small_net(seed, 10, 1.0);
        let (exact, _) = solve_problem1(&net, 5.0).unwrap();
        let (plan, _, _) = run_algorithm_a(&net, 5.0, &cfg).unwrap();
        assert!(plan.meta.converged, "seed {seed}");
        let rel = (plan.objective - exact.objective).abs() / exact.objective.max(1e-9);
        assert!(rel <= 1e-3, "seed {seed}: {} vs {}", plan.objective, exact.objective);
        assert!(plan.total() <= 5.0 * (1.0 + 1e-3));
    }
}
