use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(args)
        .output()
        .expect("bench binary runs")
}

const TINY: &str = r#"{
  "functions": ["f2", "f3"],
  "methods": ["LFK3", "KRR"],
  "train_sizes": [12, 24],
  "unlabeled_size": 10,
  "test_size": 40,
  "pool_size": 100,
  "repetitions": 2,
  "master_seed": 9,
  "grids": { "sigma_grid": [0.5, 2.0], "lambda_grid": [0.001, 0.1] }
}"#;

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn gen_data_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = bench(&[
            "gen-data",
            "--fn",
            "f1",
            "--n",
            "1000",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("x,y\n"));
    assert_eq!(text.lines().count(), 1001);
    assert!(!text.contains('\r'));
    let pool = lfk_core_read(&a);
    assert!(pool.iter().all(|(x, _)| (0.0..=10.0).contains(x)));
}

fn lfk_core_read(path: &Path) -> Vec<(f64, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn gen_data_to_stdout() {
    let out = bench(&[
        "gen-data",
        "--fn",
        "f4",
        "--n",
        "5",
        "--noise-variance",
        "0",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 6);
    for r in &rows[1..] {
        let y: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
        assert!(y == 1.0 || y == -1.0 || y == 0.0);
    }
}

#[test]
fn run_writes_report_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let csv = dir.path().join("report.csv");
    let json = dir.path().join("report.json");
    let out = bench(&[
        "run",
        "--config",
        &cfg,
        "--out",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "function,method,train_size,mse_mean,mse_std,best_sigma,best_lambda,wall_time_ms"
    );
    assert_eq!(lines.len(), 1 + 2 * 2 * 2);
    assert!(lines[1].starts_with("f2,LFK3,12,"));
    assert!(lines[4].starts_with("f2,KRR,24,"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 8);
    assert_eq!(
        report["rows"][0]["repetitions"].as_array().unwrap().len(),
        2
    );
}

#[test]
fn run_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let a = bench(&["run", "--config", &cfg]);
    let b = bench(&["run", "--config", &cfg]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn curve_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = bench(&[
        "curve",
        "--config",
        &cfg,
        "--methods",
        "KRR",
        "--functions",
        "f3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "function,method,train_size,mse_mean,mse_std");
    assert_eq!(&lines[1][..11], "f3,KRR,12,0");
    assert!(lines[2].starts_with("f3,KRR,24,"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn curve_needs_two_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = bench(&["curve", "--config", &cfg, "--train-sizes", "24"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn print_config_applies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = bench(&[
        "run",
        "--config",
        &cfg,
        "--repetitions",
        "5",
        "--unlabeled-size",
        "0",
        "--print-config",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["repetitions"], 5);
    assert_eq!(v["unlabeled_size"], 0);
    assert_eq!(v["master_seed"], 9);
    assert_eq!(v["grids"]["folds"], 4);
}

#[test]
fn defaults_without_config() {
    let out = bench(&["run", "--print-config"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["train_sizes"], serde_json::json!([25, 50, 100, 200, 300]));
    assert_eq!(v["grids"]["sigma_grid"].as_array().unwrap().len(), 11);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"pool_size": 10}"#);
    assert_eq!(bench(&["run", "--config", &bad]).status.code(), Some(1));
    let bad = write_config(dir.path(), "not json");
    assert_eq!(bench(&["run", "--config", &bad]).status.code(), Some(1));
    assert_eq!(
        bench(&["run", "--config", "/nonexistent/config.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bench(&["gen-data", "--fn", "f9"]).status.code(), Some(1));
    assert_eq!(
        bench(&["gen-data", "--fn", "f1", "--noise-variance", "-1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bench(&["frobnicate"]).status.code(), Some(1));
}
