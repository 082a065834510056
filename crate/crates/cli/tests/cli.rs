use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn cfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfree")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cfree-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join("report.json")
}

fn strip_runtimes(mut report: Value) -> Value {
    for c in report["checks"].as_array_mut().unwrap() {
        c["runtime_ms"] = Value::Null;
    }
    report
}

#[test]
fn identities_report_written_and_reproducible() {
    let path = scratch("repro");
    let args = ["run", "--suite", "identities", "--d", "1", "--trunc", "6", "--seed", "7", "--out", path.to_str().unwrap()];
    assert_eq!(cfree(&args).status.code(), Some(0));
    let first: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(cfree(&args).status.code(), Some(0));
    let second: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(strip_runtimes(first.clone()), strip_runtimes(second));

    assert_eq!(first["passed"], true);
    assert_eq!(first["config"]["suite"], "identities");
    let checks = first["checks"].as_array().unwrap();
    let closed = checks.iter().find(|c| c["name"] == "cr_closed_form").unwrap();
    assert!(closed["max_deviation"].as_f64().unwrap() < 1e-8);
    for c in checks {
        assert!(c["anchor"].as_str().is_some_and(|a| !a.is_empty()));
    }
}

#[test]
fn report_goes_to_stdout_without_out() {
    let out = cfree(&["run", "--suite", "additivity", "--d", "1", "--trunc", "3", "--trials", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let zero = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "zero_summand").unwrap();
    assert_eq!(zero["max_deviation"].as_f64(), Some(0.0));
}

#[test]
fn invalid_configs_exit_2() {
    for args in [
        &["run", "--suite", "nope"][..],
        &["run", "--suite", "clt", "--d", "0"],
        &["run", "--suite", "clt", "--trials", "0"],
        &["run", "--suite", "clt", "--tol", "-1"],
        &["run", "--suite", "clt", "--dkind", "banded"],
        &["run", "--suite", "positivity", "--dkind", "diagonal"],
        &["run", "--suite", "identities", "--d", "4", "--trunc", "9"],
        &["run"],
    ] {
        assert_eq!(cfree(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn zero_tolerance_fails_with_exit_1() {
    let out = cfree(&["run", "--suite", "identities", "--d", "2", "--trunc", "3", "--trials", "2", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
    assert!(report["checks"].as_array().unwrap().iter().any(|c| c["passed"] == false));
}

#[test]
fn schema_lists_forms() {
    let out = cfree(&["schema"]);
    assert_eq!(out.status.code(), Some(0));
    let schema: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["ExperimentConfig", "Report", "AlgebraElement", "MultilinearSeries", "Word", "Partition", "Polynomial"] {
        assert!(schema.get(key).is_some(), "{key}");
    }
}
