use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bss_core::exact::solve_bruteforce;
use bss_core::io::read_instance;
use serde_json::Value;
use tempfile::TempDir;

/// Optimum of `generate --bts 5 --seed 42`, found by exhaustive enumeration.
const GOLDEN_5_BTS_SEED_42: f64 = 3881.8329967976797;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bss-planner"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &TempDir, name: &str, bts: u32, seed: u64) -> PathBuf {
    let path = dir.path().join(name);
    let out = run(&[
        "generate",
        "--bts",
        &bts.to_string(),
        "--seed",
        &seed.to_string(),
        "-o",
        s(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

fn solve(instance: &Path, mode: &str, out_path: &Path) -> Output {
    run(&["solve", s(instance), "--mode", mode, "-o", s(out_path)])
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn objective(path: &Path) -> f64 {
    read_json(path)["objective"].as_f64().unwrap()
}

#[test]
fn generated_instance_reloads() {
    let dir = TempDir::new().unwrap();
    let path = generate(&dir, "inst.json", 10, 42);
    let inst = read_instance(&path).unwrap();
    assert_eq!(inst.bts().len(), 10);
    assert_eq!(read_json(&path)["format"], "bss-planner/1");
}

#[test]
fn generate_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", 12, 7);
    let b = generate(&dir, "b.json", 12, 7);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn zero_bts_is_a_usage_error() {
    let out = run(&["generate", "--bts", "0"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--bts"));
}

#[test]
fn every_command_has_help() {
    for cmd in ["generate", "solve", "evaluate", "bench", "fit"] {
        let out = run(&[cmd, "--help"]);
        assert_eq!(code(&out), 0, "{cmd}");
        assert!(stdout(&out).contains("Usage"), "{cmd}");
    }
    assert_eq!(code(&run(&["frobnicate"])), 1);
}

#[test]
fn exact_matches_golden_optimum() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir, "inst.json", 5, 42);
    let sol = dir.path().join("sol.json");
    let out = solve(&inst, "exact", &sol);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(objective(&sol), GOLDEN_5_BTS_SEED_42);

    let brute = solve_bruteforce(&read_instance(&inst).unwrap()).unwrap();
    assert_eq!(brute.solution.objective, GOLDEN_5_BTS_SEED_42);

    let report = &read_json(&sol)["report"];
    assert_eq!(report["optimal"], true);
    assert_eq!(report["gap"].as_f64(), Some(0.0));
    assert!(read_json(&sol)["breakdown"]["total"].is_number());
    assert!(stderr(&out).contains("objective:"));
    assert!(stderr(&out).contains("bound:"));
    assert!(stderr(&out).contains("gap:"));
}

#[test]
fn local_search_never_worse_than_greedy() {
    let dir = TempDir::new().unwrap();
    for seed in 0..5 {
        let inst = generate(&dir, "inst.json", 15, seed);
        let (g, l) = (dir.path().join("g.json"), dir.path().join("l.json"));
        assert_eq!(code(&solve(&inst, "greedy", &g)), 0);
        assert_eq!(code(&solve(&inst, "local", &l)), 0);
        assert!(objective(&l) <= objective(&g), "seed {seed}");
    }
}

#[test]
fn lagrange_bound_below_exact_optimum() {
    let dir = TempDir::new().unwrap();
    for seed in 0..5 {
        let inst = generate(&dir, "inst.json", 10, seed);
        let (e, l) = (dir.path().join("e.json"), dir.path().join("l.json"));
        assert_eq!(code(&solve(&inst, "exact", &e)), 0);
        assert_eq!(code(&solve(&inst, "lagrange", &l)), 0);
        let bound = read_json(&l)["report"]["lower_bound"].as_f64().unwrap();
        assert!(
            bound <= objective(&e),
            "seed {seed}: {bound} > {}",
            objective(&e)
        );
    }
}

#[test]
fn evaluate_accepts_solver_output() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir, "inst.json", 8, 3);
    let sol = dir.path().join("sol.json");
    assert_eq!(code(&solve(&inst, "exact", &sol)), 0);
    let out = run(&["evaluate", s(&inst), s(&sol)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("violations: none"));
    let total = format!("total:      {:.6}", objective(&sol));
    assert!(text.contains(&total), "{text}");
}

#[test]
fn evaluate_reports_edited_violations() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir, "inst.json", 8, 3);
    let sol = dir.path().join("sol.json");
    assert_eq!(code(&solve(&inst, "exact", &sol)), 0);
    let original = read_json(&sol);

    // shrink an open BSC's trunk below its load
    let mut over = original.clone();
    let configs = over["bsc_config"].as_object_mut().unwrap();
    let (_, open) = configs
        .iter_mut()
        .find(|(_, c)| c["lines"].as_u64().unwrap() > 0)
        .unwrap();
    open["lines"] = Value::from(open["lines"].as_u64().unwrap() - 1);
    let path = dir.path().join("over.json");
    std::fs::write(&path, over.to_string()).unwrap();
    let out = run(&["evaluate", s(&inst), s(&path)]);
    assert_eq!(code(&out), 3);
    assert!(
        stdout(&out).contains("[trunk-capacity]"),
        "{}",
        stdout(&out)
    );

    let mut missing = original;
    missing["assignment"].as_object_mut().unwrap().remove("0");
    let path = dir.path().join("missing.json");
    std::fs::write(&path, missing.to_string()).unwrap();
    let out = run(&["evaluate", s(&inst), s(&path)]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("[assignment]"), "{}", stdout(&out));
}

#[test]
fn bad_files_are_invalid_input() {
    let dir = TempDir::new().unwrap();
    let sol = dir.path().join("sol.json");

    let corrupt = dir.path().join("corrupt.json");
    std::fs::write(&corrupt, "{ not json").unwrap();
    assert_eq!(code(&solve(&corrupt, "exact", &sol)), 2);

    let inst = generate(&dir, "inst.json", 4, 1);
    let mut v = read_json(&inst);
    v["format"] = Value::from("bss-planner/9");
    let wrong = dir.path().join("wrong.json");
    std::fs::write(&wrong, v.to_string()).unwrap();
    let out = solve(&wrong, "exact", &sol);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bss-planner/9"));

    let mut v = read_json(&inst);
    v["bts"][0]["traffic_erl"] = Value::from(-1.0);
    let negative = dir.path().join("negative.json");
    std::fs::write(&negative, v.to_string()).unwrap();
    let out = solve(&negative, "exact", &sol);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("traffic"), "{}", stderr(&out));
}

#[test]
fn overloaded_network_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("inst.json");
    let out = run(&[
        "generate",
        "--bts",
        "3",
        "--bsc-candidates",
        "1",
        "-o",
        s(&path),
    ]);
    assert_eq!(code(&out), 0);
    let mut v = read_json(&path);
    for b in v["bts"].as_array_mut().unwrap() {
        b["traffic_erl"] = Value::from(2000.0);
    }
    std::fs::write(&path, v.to_string()).unwrap();
    for mode in ["exact", "greedy", "local", "lagrange"] {
        let out = solve(&path, mode, &dir.path().join("sol.json"));
        assert_eq!(code(&out), 3, "{mode}: {}", stderr(&out));
    }
}

#[test]
fn node_limit_without_proof_exits_4() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir, "inst.json", 25, 11);
    let sol = dir.path().join("sol.json");
    let out = run(&["solve", s(&inst), "--node-limit", "1", "-o", s(&sol)]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let report = &read_json(&sol)["report"];
    assert_eq!(report["limit_reached"], true);
    assert!(report["lower_bound"].as_f64().unwrap() <= objective(&sol));
}

#[test]
fn solve_objective_is_repeatable() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir, "inst.json", 12, 5);
    for mode in ["exact", "greedy", "local", "lagrange"] {
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        assert_eq!(code(&solve(&inst, mode, &a)), 0);
        assert_eq!(code(&solve(&inst, mode, &b)), 0);
        assert_eq!(objective(&a).to_bits(), objective(&b).to_bits(), "{mode}");
        assert_eq!(read_json(&a)["assignment"], read_json(&b)["assignment"]);
    }
}

#[test]
fn bench_writes_table_and_detail() {
    let dir = TempDir::new().unwrap();
    let (table, detail) = (dir.path().join("t.csv"), dir.path().join("d.csv"));
    let out = run(&[
        "bench",
        "--sizes",
        "5,10",
        "--reps",
        "2",
        "--seed",
        "9",
        "-o",
        s(&table),
        "--instances-csv",
        s(&detail),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&table).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "bts,variables,constraints,density,avg_time_s,std_dev_s,avg_gap"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("5,") && lines[1].split(',').nth(2) == Some("15"));
    assert!(lines[2].starts_with("10,") && lines[2].split(',').nth(2) == Some("30"));
    assert_eq!(std::fs::read_to_string(&detail).unwrap().lines().count(), 5);

    let out = run(&["fit", "--csv", s(&table)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("a = "));
}

#[test]
fn bench_rejects_zero_reps() {
    assert_eq!(code(&run(&["bench", "--sizes", "5", "--reps", "0"])), 1);
}

#[test]
fn fit_recovers_sampled_curve() {
    let points: Vec<String> = (1..=10)
        .map(|k| {
            let x = 5.0 * k as f64;
            format!("{x}:{}", 0.851 * (0.244 * x).exp())
        })
        .collect();
    let out = run(&["fit", "--points", &points.join(",")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    assert!((value("a = ") - 0.851).abs() < 1e-6);
    assert!((value("b = ") - 0.244).abs() < 1e-6);
}

#[test]
fn fit_rejects_nonpositive_times() {
    let out = run(&["fit", "--points", "1:1,2:0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("positive"));
}
