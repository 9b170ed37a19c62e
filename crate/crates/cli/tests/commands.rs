//! End-to-end runs of the `qdflow` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qdflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdflow")).args(args).output().expect("run qdflow")
}

fn run_json(dir: &Path, name: &str, args: &[&str]) -> (Output, Value) {
    let json = dir.join(format!("{name}.json"));
    let svg = dir.join(format!("{name}.svg"));
    let mut all = args.to_vec();
    all.extend(["--json", json.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    let out = qdflow(&all);
    let doc = std::fs::read(&json).map(|b| serde_json::from_slice(&b).unwrap()).unwrap_or(Value::Null);
    (out, doc)
}

fn pair(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn graph_with_lambda_squared() {
    let dir = tempfile::tempdir().unwrap();
    let (out, doc) = run_json(dir.path(), "g", &["graph", "--lambda2", "-2,-1", "--a", "1,-1", "--b", "0,1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(doc["schema"], "qdflow/1");
    assert!(doc["gate"]["v_plus"].is_array() && doc["gate"]["v_minus"].is_array());
    assert_eq!(doc["trajectories"].as_array().unwrap().len(), 6);
    for t in doc["trajectories"].as_array().unwrap() {
        assert!(t["kind"].is_string() && t["launch"].is_object() && t["endpoint_class"]["class"].is_string());
        assert!(t["points"].as_array().unwrap().len() >= 2);
    }
    assert!(dir.path().join("g.svg").exists());
}

#[test]
fn graph_segment_case_has_short_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let (out, doc) = run_json(dir.path(), "g", &["graph", "--lambda", "0,1", "--a", "1,0", "--b", "4,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!doc["short_trajectories"].as_array().unwrap().is_empty());
    assert_eq!(doc["gate"]["branch"], "both");
}

#[test]
fn json_goes_to_stdout_without_json_flag() {
    let out = qdflow(&["graph", "--lambda", "0,1", "--a", "1,0", "--b", "4,0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["command"], "graph");
}

#[test]
fn degenerate_parameters_exit_2() {
    let out = qdflow(&["graph", "--lambda", "1,0", "--a", "1,0", "--b", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a = b"));
    assert_eq!(qdflow(&["family", "--A", "-1,0"]).status.code(), Some(2));
    assert_eq!(qdflow(&["family", "--A", "-2,0"]).status.code(), Some(2));
    assert_eq!(qdflow(&["motherbody", "--p", "0,2", "--q", "1,0", "--r", "-1,0"]).status.code(), Some(2));
    assert_eq!(qdflow(&["graph", "--lambda", "0,0", "--a", "1,0", "--b", "2,0"]).status.code(), Some(2));
}

#[test]
fn bad_flags_and_io_exit_2() {
    assert_eq!(qdflow(&["graph", "--a", "1,0", "--b", "2,0"]).status.code(), Some(2));
    assert_eq!(qdflow(&["graph", "--lambda", "1", "--a", "1,0", "--b", "2,0"]).status.code(), Some(2));
    assert_eq!(qdflow(&["render", "--json", "/nonexistent/x.json", "--svg", "/tmp/x.svg"]).status.code(), Some(2));
    let out = qdflow(&["graph", "--lambda", "0,1", "--a", "1,0", "--b", "4,0", "--json", "/nonexistent/dir/x.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn family_counts_and_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let (out, doc) = run_json(dir.path(), "a3", &["family", "--A", "3,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(doc["short_trajectories"].as_array().unwrap().len(), 2);
    let (out, doc) = run_json(dir.path(), "m", &["family", "--A", "-2,2", "--overlay-n", "60"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(doc["short_trajectories"].as_array().unwrap().len(), 1);
    let overlay = &doc["overlay"];
    assert_eq!(overlay["zeros"].as_array().unwrap().len(), 60);
    assert_eq!(pair(&overlay["alpha"]), (-120.0, 120.0));
    assert!(overlay["mean_dist"].as_f64().unwrap() < 0.05);
    let svg = std::fs::read_to_string(dir.path().join("m.svg")).unwrap();
    assert_eq!(svg.matches("class=\"overlay\"").count(), 60);
}

#[test]
fn family_verify_reports_decreasing_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let (out, doc) = run_json(dir.path(), "v", &["family", "--A", "3,0", "--verify", "--overlay-n", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &doc["verification"];
    assert_eq!(v["decreasing"], true);
    assert_eq!(v["samples"].as_array().unwrap().len(), 8);
}

#[test]
fn motherbody_bessel_case() {
    let dir = tempfile::tempdir().unwrap();
    let (out, doc) = run_json(dir.path(), "mb", &["motherbody", "--p", "-3,0", "--q", "-1,0", "--r", "-4,0"]);
    assert_eq!(out.status.code(), Some(0));
    let (p, m) = (pair(&doc["masses"]["plus"]), pair(&doc["masses"]["minus"]));
    let mut re = [p.0, m.0];
    re.sort_by(f64::total_cmp);
    assert!((re[0] + 4.0).abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12, "{re:?}");
    assert_eq!(doc["real_mass_exists"], true);
    assert!(doc["quaddiff"]["lambda"].is_array());
    let masses: Vec<f64> = doc["densities"].as_array().unwrap().iter().filter_map(|d| d["total_mass"].as_f64()).collect();
    assert!(masses.iter().any(|m| (m - 1.0).abs() < 1e-3), "{masses:?}");
}

#[test]
fn verify_suites_pass() {
    let out = qdflow(&["verify", "--suite", "periods", "--samples", "100", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("period quadrature") && !table.contains("FAIL"));
    let out = qdflow(&["verify", "--suite", "bessel"]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8_lossy(&out.stdout);
    for name in ["recurrence", "ODE", "Laguerre", "Vieta"] {
        assert!(table.contains(name), "{table}");
    }
}

#[test]
fn verify_is_deterministic() {
    let run = || qdflow(&["verify", "--suite", "gates", "--samples", "20", "--seed", "3"]).stdout;
    assert_eq!(run(), run());
}

#[test]
fn render_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: [&[&str]; 3] = [
        &["graph", "--lambda", "0,1", "--a", "1,0", "--b", "4,0", "--orthogonal", "--foliation", "4"],
        &["family", "--A", "-1,0.1", "--overlay-n", "30"],
        &["motherbody", "--p", "-3,0", "--q", "-1,0", "--r", "-4,0"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let name = format!("c{k}");
        let (out, _) = run_json(d, &name, args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let again = d.join(format!("{name}.again.svg"));
        let json = d.join(format!("{name}.json"));
        let out = qdflow(&["render", "--json", json.to_str().unwrap(), "--svg", again.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(std::fs::read(d.join(format!("{name}.svg"))).unwrap(), std::fs::read(&again).unwrap(), "{args:?}");
    }
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["family", "--A", "-2,2", "--overlay-n", "20"];
    let one = Command::new(env!("CARGO_BIN_EXE_qdflow")).args(args).env("QDFLOW_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_qdflow")).args(args).env("QDFLOW_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_qdflow")).args(args).env("QDFLOW_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
