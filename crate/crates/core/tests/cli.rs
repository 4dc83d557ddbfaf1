use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn holosense(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holosense"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &[&str] = &[
    "--M",
    "8",
    "--m",
    "4",
    "--N",
    "5",
    "--sigma2",
    "0.5",
    "--model",
    "exponential",
    "--gamma",
    "0.8",
];

fn with<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(SMALL);
    v.extend_from_slice(extra);
    v
}

#[test]
fn scalar_design() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "design", "--M", "1", "--m", "1", "--N", "1", "--sigma2", "1", "--model", "uniform",
    ];
    assert!(holosense(&args, tmp.path()).status.success());
    let doc = read_json(&tmp.path().join("allocation.json"));
    assert!((doc["mse_n"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(doc["s"], serde_json::json!([1]));
}

#[test]
fn zero_trials_is_rejected_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = holosense(&with("simulate", &["--trials", "0"]), tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
    assert!(!tmp.path().join("simulate.csv").exists());
}

#[test]
fn budget_guard_points_to_random_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let out = holosense(&with("arrangements", &["--budget", "100"]), tmp.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("budget") && err.contains("random"), "{err}");
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"M": 8, "m": 4, "N": 5, "sigma2": 0.5, "model": "exponential", "gamma": 0.9}"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    let status = Command::new(env!("CARGO_BIN_EXE_holosense"))
        .args(["design", "--config"])
        .arg(&cfg)
        .args(["--gamma", "0.8", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let doc = read_json(&out.join("allocation.json"));
    assert!((doc["base_point"].as_f64().unwrap() - 4.161_139_2).abs() < 1e-6);

    std::fs::write(&cfg, r#"{"M": 8, "bogus": 1}"#).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_holosense"))
        .args(["design", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!status.status.success());
}

#[test]
fn full_horizon_adapt_agrees_with_ranking() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(holosense(&with("arrangements", &[]), tmp.path())
        .status
        .success());
    let rankings = std::fs::read_to_string(tmp.path().join("rankings.csv")).unwrap();
    assert_eq!(rankings.lines().count(), 3771);
    let top = rankings
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .to_string();
    assert!(
        holosense(&with("adapt", &["--truncate-L", "5"]), tmp.path())
            .status
            .success()
    );
    let doc = read_json(&tmp.path().join("adapt.json"));
    assert_eq!(doc["best"]["id"], Value::String(top));
    assert_eq!(doc["displaced"], Value::Bool(false));
    assert!((doc["best_mse_N"].as_f64().unwrap() - 1.0747).abs() < 1e-3);
}

#[test]
fn erasure_without_losses_costs_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(holosense(&with("erasure", &[]), tmp.path())
        .status
        .success());
    let doc = read_json(&tmp.path().join("erasure.json"));
    assert_eq!(doc["penalty"].as_f64(), Some(0.0));
    assert_eq!(doc["total"], doc["mse0"]);
    let bad = holosense(&with("erasure", &["--erased", "6"]), tmp.path());
    assert!(!bad.status.success());
}

#[test]
fn random_mode_needs_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = holosense(
        &with("arrangements", &["--mode", "random", "--count", "10"]),
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn repeated_blocks_switch() {
    let tmp = tempfile::tempdir().unwrap();
    let args = with("arrangements", &["--repeated-blocks", "true"]);
    assert!(holosense(&args, tmp.path()).status.success());
    let rankings = std::fs::read_to_string(tmp.path().join("rankings.csv")).unwrap();
    assert_eq!(rankings.lines().count(), 4101);
}
