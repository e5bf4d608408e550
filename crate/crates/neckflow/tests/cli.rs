//! End-to-end runs of the `neckflow` binary.

use serde_json::Value;
use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn neckflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neckflow")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, Value) {
    let mut full: Vec<&str> = args.to_vec();
    let out = dir.to_str().unwrap();
    full.extend(["--out", out]);
    let o = neckflow(&full);
    let code = o.status.code().unwrap();
    let v = serde_json::from_slice(&o.stdout).unwrap_or(Value::Null);
    (code, v)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn neck_symmetric_values() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _) = run_in(tmp.path(), &["neck", "--a", "1,1,1", "--m", "3"]);
    assert_eq!(code, 0);
    let r = report(tmp.path());
    for p in r["phi"].as_array().unwrap() {
        assert!((p.as_f64().unwrap() - PI / 3.0).abs() < 1e-8);
    }
    assert!((r["A"].as_f64().unwrap() - 4.0 * PI).abs() < 1e-12);
    assert!(r["scaling"]["phi_invariance"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["provenance"]["c_plus"]["operation"], "lawlor::neck_constant");
}

#[test]
fn neck_inverse_map() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, v) = run_in(tmp.path(), &["neck", "--phi", "0.5,1.0,1.6415926535897931", "--A", "3"]);
    assert_eq!(code, 0);
    assert!((v["A"].as_f64().unwrap() - 3.0).abs() < 1e-8);
}

#[test]
fn graph_torus_constants() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("torus.json");
    std::fs::write(
        &file,
        r#"{"vertices":[{"id":"v1","volume":100.0},{"id":"v2","volume":50.0}],
            "edges":[{"id":"e1","tail":"v1","head":"v2","c":1.5}]}"#,
    )
    .unwrap();
    let out = tmp.path().join("run");
    let (code, _) = run_in(&out, &["graph", "--file", file.to_str().unwrap(), "--rate", "0.3"]);
    assert_eq!(code, 0);
    let r = report(&out);
    let c: Vec<f64> = r["vertices"].as_array().unwrap().iter().map(|v| v["C"].as_f64().unwrap()).collect();
    let (v1, v2, q) = (100.0, 50.0, 1.5 * 0.3);
    assert!((c[0] + q * v2 / (v1 + v2)).abs() < 1e-12);
    assert!((c[1] - q * v1 / (v1 + v2)).abs() < 1e-12);
    assert!(r["weighted_sum"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let (code, _) = run_in(dir, &["neck", "--a", "0.7,1.3,2", "--seed", "11", "--instances", "5"]);
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(a.join("report.json")).unwrap(), std::fs::read(b.join("report.json")).unwrap());
}

#[test]
fn config_file_and_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"m": 3, "eps0": 0.2, "horizon": 10, "samples": 50, "seed": 3}"#).unwrap();
    let out = tmp.path().join("run");
    let (code, _) = run_in(&out, &["ode", "--config", cfg.to_str().unwrap(), "--eps0", "0.1"]);
    assert_eq!(code, 0);
    let r = report(&out);
    assert!((r["eps0"].as_f64().unwrap() - 0.1).abs() < 1e-15);
    assert!(r["numeric_max_rel_error"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["assumption"]["passes"], true);
    let csv = std::fs::read_to_string(out.join("plotdata_ode.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,eps,deps_dt,log_t,log_eps");
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let (code, v) = run_in(tmp.path(), &["ode", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["exit_code"], 2);
    let (code, _) = run_in(tmp.path(), &["neck", "--a", "1,1", "--m", "3"]);
    assert_eq!(code, 2);
    let (code, _) = run_in(tmp.path(), &["neck", "--no-such-flag"]);
    assert_eq!(code, 2);
}

#[test]
fn geometric_failures_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("cycle.json");
    std::fs::write(
        &file,
        r#"{"vertices":[{"id":"v1","volume":1.0}],
            "edges":[{"id":"e1","tail":"v1","head":"v1","c":1.0}]}"#,
    )
    .unwrap();
    let (code, v) = run_in(&tmp.path().join("g"), &["graph", "--file", file.to_str().unwrap()]);
    assert_eq!(code, 4, "{v}");
}

#[test]
fn numeric_failures_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, v) = run_in(tmp.path(), &["ode", "--eps0", "0.1", "--tol", "1e-300", "--horizon", "1000"]);
    assert_eq!(code, 3, "{v}");
}

#[test]
fn report_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    assert_eq!(run_in(&root.join("neck"), &["neck"]).0, 0);
    assert_eq!(run_in(&root.join("ode"), &["ode", "--samples", "40"]).0, 0);
    assert_eq!(run_in(&root.join("graph"), &["graph"]).0, 0);
    let root_s = root.to_str().unwrap();
    assert_eq!(neckflow(&["report", "--root", root_s]).status.code(), Some(0));
    let first = std::fs::read(root.join("report.json")).unwrap();
    let eps_plot = std::fs::read(root.join("plotdata_eps.csv")).unwrap();
    assert_eq!(neckflow(&["report", "--root", root_s]).status.code(), Some(0));
    assert_eq!(first, std::fs::read(root.join("report.json")).unwrap());
    assert_eq!(eps_plot, std::fs::read(root.join("plotdata_eps.csv")).unwrap());
    let r = report(root);
    let runs: Vec<&str> = r["runs"].as_array().unwrap().iter().map(|x| x["run"].as_str().unwrap()).collect();
    assert_eq!(runs, ["graph", "neck", "ode"]);
    let slope = r["fits"][0]["slope"].as_f64().unwrap();
    assert!((slope + 1.0).abs() < 0.05, "eps ~ t^{slope}");
}

#[test]
fn glue_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _) = run_in(tmp.path(), &["glue", "--resolution", "coarse", "--eps", "0.1,0.05"]);
    assert_eq!(code, 0);
    for f in ["report.json", "summary.csv", "mesh.jsonl", "plotdata_glue.csv"] {
        assert!(tmp.path().join(f).is_file(), "{f}");
    }
    let line = std::fs::read_to_string(tmp.path().join("mesh.jsonl")).unwrap();
    let first: Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    assert!(first.get("theta").is_some() && first.get("metric").is_some());
    let summary = std::fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), "eps,sup_theta,sup_normA,V1,V2");
}
