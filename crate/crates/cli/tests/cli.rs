use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ybx(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ybx"))
        .args(args)
        .current_dir(dir)
        .env("YBX_THREADS", "2")
        .output()
        .expect("ybx runs")
}

fn payload(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn field(report: &Value, key: &str) -> Vec<Value> {
    report["checks"].as_array().unwrap().iter().map(|c| c[key].clone()).collect()
}

#[test]
fn list_prints_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = ybx(&["list"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["FAY", "QYBE-BB", "GNF-F", "AYBE-ACF", "NORD-ACF", "DETG"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}

#[test]
fn passing_run_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = ybx(
        &["run", "--check", "FAY", "--samples", "100", "--seed", "7", "--tol", "1e-10", "--report", "out.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = payload(&dir.path().join("out.json"));
    assert!(report["header"]["convention_note"].as_str().unwrap().contains("Baxter-Belavin"));
    let maxes = field(&report, "max_residual");
    assert_eq!(maxes.len(), 4);
    assert!(maxes.iter().all(|m| m.as_f64().unwrap() < 1e-10));
    assert!(field(&report, "samples").iter().all(|s| s == 100));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ybx(&["run", "--check", "UNIT-BB", "--samples", "3", "--tol", "1e-30", "--format", "text"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = ybx(&["run", "--check", "NOSUCH"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown check id"));
    for args in [
        &["run", "--tau", "0.3+0.8"][..],
        &["run", "--samples", "0"],
        &["run", "--format", "xml"],
        &["run", "-s", "3"],
        &["frobnicate"],
        &["run", "--config", "missing.conf"],
    ] {
        assert_eq!(ybx(args, dir.path()).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn reports_are_deterministic_and_config_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.conf"), "check = SKEW-ACF, CUBIC-BB\nseed = 3\nsamples = 4\nn = 2\n").unwrap();
    let run = |report: &str, seed: &str| {
        let out = ybx(&["run", "--config", "run.conf", "--seed", seed, "--report", report], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        payload(&dir.path().join(report))
    };
    let a = run("a.json", "11");
    let b = run("b.json", "11");
    let c = run("c.json", "12");
    assert_eq!(a["checks"], b["checks"]);
    assert_ne!(a["checks"], c["checks"]);
    assert!(field(&a, "samples").iter().all(|s| s == 4));
    assert!(field(&a, "N").iter().all(|n| n == 2));
    let ids: Vec<Value> = field(&a, "id");
    assert!(ids.contains(&Value::from("SKEW-ACF")) && ids.contains(&Value::from("CUBIC-BB")));
}

#[test]
fn csv_report_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = ybx(&["run", "--check", "FAYDEG-2", "--samples", "5", "--case", "rational,trigonometric", "--format", "csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("id,paper_eq,N,case"));
}
