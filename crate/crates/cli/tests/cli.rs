use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use contagion_cli::ResultRecord;
use contagion_core::defaults_min::oracle_nd;
use contagion_core::generators::TopologySpec;
use tempfile::TempDir;

fn contagion(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contagion"))
        .env("CONTAGION_OUT_DIR", dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> ResultRecord {
    let out = contagion(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    record(&dir.join(format!("{}.json", args[0])))
}

fn record(path: &Path) -> ResultRecord {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn net(dir: &Path, args: &[&str]) -> PathBuf {
    let mut full = vec!["gen"];
    full.extend(args);
    ok(dir, &full);
    dir.join("network.json")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn four_node_examples() {
    let dir = TempDir::new().unwrap();
    let four = net(dir.path(), &["--topology", "four-node"]);
    let four = four.to_str().unwrap();
    let rec = ok(dir.path(), &["clear", "--net", four, "--mechanism", "prop", "--method", "fp"]);
    assert!((rec.clearing.unwrap().total_unpaid() - 98.0).abs() < 1e-9);
    let rec = ok(dir.path(), &["bailout", "--net", four, "--problem", "p1", "--budget", "15"]);
    let c = rec.plan.unwrap().c;
    for (a, b) in c.iter().zip([0.0, 0.0, 6.0, 9.0]) {
        assert!((a - b).abs() < 1e-9, "{c:?}");
    }
    let rec = ok(dir.path(), &["bailout", "--net", four, "--problem", "lagrangian", "--lambda", "1", "--weight", "0.45"]);
    assert!((rec.plan.unwrap().objective - 26.05).abs() < 1e-9);
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let missing = d.join("missing.json");
    assert_eq!(contagion(d, &["clear", "--net", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(contagion(d, &["frobnicate"]).status.code(), Some(2));

    let four = net(d, &["--topology", "four-node"]);
    let four = four.to_str().unwrap();
    assert_eq!(contagion(d, &["bailout", "--net", four, "--problem", "p1"]).status.code(), Some(2));
    assert_eq!(contagion(d, &["bailout", "--net", four, "--problem", "p1", "--budget", "-1"]).status.code(), Some(2));
    assert_eq!(contagion(d, &["clear", "--net", four, "--cash", "1,2"]).status.code(), Some(2));

    std::fs::write(d.join("blocker"), "").unwrap();
    let blocked = d.join("blocker").join("out.json");
    let out = contagion(d, &["--out", blocked.to_str().unwrap(), "clear", "--net", four]);
    assert_eq!(out.status.code(), Some(3));

    // the round cap leaves a flagged best-effort result behind
    let out = contagion(d, &["distsim", "--net", four, "--algorithm", "a", "--budget", "15", "--max-rounds", "10"]);
    assert_eq!(out.status.code(), Some(5));
    let rec = record(&d.join("distsim.json"));
    assert!(!rec.converged);
    assert!(rec.plan.is_some());

    // node limit before any certificate
    let big = net(d, &["--topology", "large-core-periphery", "--seed", "1"]);
    let args = ["bailout", "--net", big.to_str().unwrap(), "--problem", "aon", "--budget", "100", "--node-limit", "5"];
    assert_eq!(contagion(d, &args).status.code(), Some(5));
}

#[test]
fn repeated_runs_are_identical_apart_from_the_timestamp() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let g = net(d, &["--topology", "random-dense", "--n", "10", "--seed", "4"]);
    let g = g.to_str().unwrap();
    let runs: Vec<serde_json::Value> = (0..2)
        .map(|k| {
            let out = d.join(format!("run{k}.json"));
            let args = ["--out", out.to_str().unwrap(), "stochastic", "--net", g, "--method", "benders", "--budget", "3", "--m", "20", "--seed", "9"];
            let o = contagion(d, &args);
            assert!(o.status.success());
            let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
            assert!(v["timestamp"].is_string());
            v.as_object_mut().unwrap().remove("timestamp");
            v
        })
        .collect();
    assert_eq!(runs[0].to_string(), runs[1].to_string());

    let bytes: Vec<Vec<u8>> = (0..2)
        .map(|k| {
            let out = d.join(format!("det{k}.json"));
            let args = ["--deterministic", "--out", out.to_str().unwrap(), "mindefaults", "--net", g, "--algorithm", "rw", "--budget", "2"];
            assert!(contagion(d, &args).status.success());
            std::fs::read(&out).unwrap()
        })
        .collect();
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn records_round_trip() {
    let dir = TempDir::new().unwrap();
    let g = net(dir.path(), &["--topology", "random-core-periphery", "--seed", "2"]);
    ok(dir.path(), &["bailout", "--net", g.to_str().unwrap(), "--problem", "p1", "--budget", "7.3"]);
    let text = std::fs::read_to_string(dir.path().join("bailout.json")).unwrap();
    let rec: ResultRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(rec.to_json() + "\n", text);
    let again: ResultRecord = serde_json::from_str(&rec.to_json()).unwrap();
    assert_eq!(again, rec);
    assert_eq!(rec.config_hash.len(), 64);
    assert!(rec.versions.contains_key("contagion-core"));
}

#[test]
fn scenario_files_are_read() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let g = net(d, &["--topology", "random-dense", "--n", "10", "--seed", "1"]);
    let csv = d.join("scenarios.csv");
    let rows: Vec<String> = (0..3).map(|k| vec![format!("{}", 0.5 * k as f64); 10].join(",")).collect();
    let header: Vec<String> = (0..10).map(|i| format!("e{i}")).collect();
    std::fs::write(&csv, format!("{}\n{}\n", header.join(","), rows.join("\n"))).unwrap();
    let rec = ok(d, &["stochastic", "--net", g.to_str().unwrap(), "--method", "direct", "--budget", "2", "--scenarios", csv.to_str().unwrap()]);
    assert_eq!(rec.diagnostics["scenario_values"].as_array().unwrap().len(), 3);

    std::fs::write(&csv, "1,2,3\n").unwrap();
    let out = contagion(d, &["stochastic", "--net", g.to_str().unwrap(), "--method", "direct", "--budget", "2", "--scenarios", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_library_operation_is_reachable() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let mut seen = BTreeSet::new();
    let mut run = |args: &[&str]| {
        let rec = ok(d, args);
        seen.extend(rec.operations);
    };
    for topo in [&["--topology", "binary-tree", "--levels", "4"][..], &["--topology", "cycle-star", "--cycles", "3"], &["--topology", "core-periphery-fixed"], &["--topology", "knapsack", "--pbar", "1,2"]] {
        let mut args = vec!["gen"];
        args.extend(topo);
        run(&args);
    }
    let g = net(d, &["--topology", "random-dense", "--n", "8", "--seed", "3"]);
    let g = g.to_str().unwrap();
    run(&["gen", "--topology", "random-dense", "--n", "8", "--seed", "3"]);
    run(&["clear", "--net", g, "--method", "lp", "--threat"]);
    run(&["clear", "--net", g, "--mechanism", "aon", "--method", "fd"]);
    for p in ["p1", "demange", "p3", "aon"] {
        run(&["bailout", "--net", g, "--problem", p, "--budget", "2"]);
    }
    run(&["bailout", "--net", g, "--problem", "lagrangian", "--lambda", "0.5"]);
    run(&["mindefaults", "--net", g, "--algorithm", "rw", "--budget", "2", "--restarts", "1"]);
    run(&["mindefaults", "--net", g, "--algorithm", "greedy", "--budget", "2", "--oracle", "cycle-star"]);
    for m in ["direct", "benders", "sgd"] {
        run(&["stochastic", "--net", g, "--method", m, "--budget", "2", "--m", "5", "--iters", "50"]);
    }
    run(&["distsim", "--net", g, "--algorithm", "a", "--budget", "2", "--tol", "1e-4"]);
    run(&["distsim", "--net", g, "--algorithm", "a-prime", "--lambda", "1", "--tol", "1e-4"]);
    run(&["distsim", "--net", g, "--algorithm", "p", "--budget", "2", "--tol", "1e-4"]);
    let expected = [
        "build_network",
        "weighted_unpaid",
        "gen_binary_tree",
        "gen_cycle_star",
        "gen_core_periphery_fixed",
        "gen_random",
        "gen_knapsack",
        "solve_lp",
        "solve_milp",
        "project_simplex",
        "clear_proportional",
        "clear_all_or_nothing",
        "threat_index",
        "solve_problem1",
        "solve_problem1_lagrangian",
        "solve_problem1_demange",
        "solve_problem3",
        "solve_problem1_aon",
        "minimize_defaults_rw",
        "minimize_defaults_greedy",
        "oracle_Nd",
        "solve_saa_direct",
        "solve_saa_benders",
        "solve_saa_sgd",
        "run_algorithm_A",
        "run_algorithm_A_prime",
        "run_algorithm_P",
    ];
    let missing: Vec<&str> = expected.iter().copied().filter(|op| !seen.contains(*op)).collect();
    assert!(missing.is_empty(), "unreachable: {missing:?}");
}

#[test]
fn cycle_figure_matches_the_oracle_except_at_full_rescue() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["reproduce", "--figure", "fig4", "--step", "50"]);
    let rows = csv_rows(&dir.path().join("fig4.csv"));
    assert_eq!(rows.len(), 21);
    let spec = TopologySpec::CycleStar { cycles: 100, amount: 10.0 };
    for row in &rows {
        let c: f64 = row[0].parse().unwrap();
        assert_eq!(row[1], oracle_nd(&spec, c).unwrap().to_string());
        assert_eq!(row[3] == row[1], c != 1000.0, "budget {c}: {row:?}");
    }
}

#[test]
fn tree_figure_has_oracle_column() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["reproduce", "--figure", "fig2", "--step", "256"]);
    let rows = csv_rows(&dir.path().join("fig2.csv"));
    let spec = TopologySpec::BinaryTree { levels: 10 };
    for row in &rows {
        let c: f64 = row[0].parse().unwrap();
        let oracle = oracle_nd(&spec, c).unwrap();
        assert_eq!(row[1], oracle.to_string());
        for col in [2, 3] {
            let nd: usize = row[col].parse().unwrap();
            assert!(nd >= oracle && nd <= row[4].parse().unwrap());
        }
    }
}

#[test]
fn random_figure_reports_bands() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["reproduce", "--figure", "fig8", "--samples", "3", "--step", "50"]);
    let rows = csv_rows(&dir.path().join("fig8.csv"));
    assert_eq!(rows.len(), 3);
    for row in rows {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[2] <= v[1] && v[1] <= v[3]);
        assert!(v[5] <= v[4] && v[4] <= v[6]);
    }
}

#[test]
fn four_node_distributed_trace_ends_at_the_optimum() {
    let dir = TempDir::new().unwrap();
    let rec = ok(dir.path(), &["reproduce", "--figure", "dist_fourNode", "--trace-every", "200"]);
    let rows = csv_rows(&dir.path().join("dist_fourNode.csv"));
    let last = |tag: &str| rows.iter().rev().find(|r| r[0] == tag).unwrap().clone();
    let vals = |r: &[String], from: usize| -> Vec<f64> { r[from..from + 4].iter().map(|x| x.parse().unwrap()).collect() };
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-3);
    let lag = last("lagrangian");
    assert!(close(&vals(&lag, 3), &[81.0, 20.0, 80.0, 10.0]), "{lag:?}");
    assert!(close(&vals(&lag, 7), &[0.0, 0.0, 8.5, 9.0]), "{lag:?}");
    let bud = last("budget");
    assert!(close(&vals(&bud, 3), &[76.0, 20.0, 75.0, 10.0]), "{bud:?}");
    assert!(close(&vals(&bud, 7), &[0.0, 0.0, 6.0, 9.0]), "{bud:?}");
    assert!((rec.diagnostics["lagrangian_cost"].as_f64().unwrap() - 26.05).abs() < 1e-3);
}

#[test]
fn help_documents_the_flags() {
    let dir = TempDir::new().unwrap();
    let out = contagion(dir.path(), &["bailout", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--net", "--problem", "--budget", "--lambda", "--rel-gap", "--out-dir", "CONTAGION_OUT_DIR"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}
