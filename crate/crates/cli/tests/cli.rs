use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn slocc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slocc")).args(args).env_remove("SLOCC_SEED").output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = slocc(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing `{key}` in {v}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bound_for_symmetric_target() {
    let v = json(&["bound", "--sym-overlap", "0.5"]);
    assert!((num(&v, "value") - 0.9604).abs() < 5e-4);
    assert_eq!(v["method"], "interference_tangle");
    assert!((num(&v, "argmin_x").abs() - 1.1306).abs() < 5e-3);
}

#[test]
fn bound_method_selection_with_flipped_phase() {
    let v = json(&["bound", "--sym-overlap", "0.5", "--phi", "pi", "--method", "theorem1"]);
    assert!((num(&v, "value") - 0.7778).abs() < 5e-5);
    // The best bound is tighter than the selected one here.
    assert!(num(&v["best"], "value") < num(&v, "value"));
}

#[test]
fn bound_rejects_product_target() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("prod.json");
    fs::write(&p, r#"{"dims":[2,2,2],"amplitudes":[[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#).unwrap();
    let out = slocc(&["bound", "--target", path_str(&p)]);
    assert!(!out.status.success());
}

#[test]
fn four_step_lower_bound() {
    let v = json(&["lower", "--four-step", "--sym-overlap", "0.5"]);
    assert!((num(&v, "closed_form") - 0.75).abs() < 1e-9);
    assert!((num(&v, "simulated") - 0.75).abs() < 1e-9);
    assert!((num(&v, "baseline") - 0.4219).abs() < 5e-5);
}

#[test]
fn ghz3_protocol_round_trip_through_simulate_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("target.json");
    let protocol = dir.path().join("protocol.json");
    let trace = dir.path().join("trace.json");
    let v = json(&["decompose", "--state", "random", "--seed", "7"]);
    fs::write(&target, v["state"].to_string()).unwrap();

    let v = json(&["lower", "--ghz3", "--target", "random", "--seed", "7"]);
    assert!((num(&v, "simulated") - 1.0).abs() < 1e-9);
    let v = json(&["lower", "--ghz3", "--target", path_str(&target), "--protocol-out", path_str(&protocol)]);
    assert!((num(&v, "simulated") - 1.0).abs() < 1e-9);

    let out = slocc(&[
        "simulate",
        "--protocol",
        path_str(&protocol),
        "--ghz",
        "3,3",
        "--target",
        path_str(&target),
        "-o",
        path_str(&trace),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let written: Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert!((num(&written, "success_probability") - 1.0).abs() < 1e-9);
    assert!(num(&written["conservation"], "interference_residual") < 1e-9);

    let check = json(&["verify", "--trace", path_str(&trace), "--ghz", "3,3", "--target", path_str(&target)]);
    assert_eq!(check["passed"], true);
}

#[test]
fn incomplete_protocol_fails() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    // One outcome `diag(1, 0.5)` leaves the effects short of the identity.
    fs::write(&p, r#"{"node":{"party":0,"operators":[[[[1,0],[0,0]],[[0,0],[0.5,0]]]]},"children":[null]}"#).unwrap();
    let out = slocc(&["simulate", "--protocol", path_str(&p)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("incomplete"), "{err}");
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\"dims\": [2, 2, 2],\n \"amplitudes\": [}").unwrap();
    let out = slocc(&["decompose", "--state", path_str(&p)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn oracle_agrees_with_closed_form() {
    let v = json(&["oracle", "--interference", "-0.2", "--samples", "1e5", "--chunks", "8"]);
    assert_eq!(v["passed"], true);
    assert!(num(&v, "oracle") <= num(&v, "closed_form") + 1e-9);
}

#[test]
fn seeded_runs_are_deterministic() {
    let a = slocc(&["decompose", "--state", "random", "--seed", "11"]);
    let b = slocc(&["decompose", "--state", "random", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_slocc"))
        .args(["decompose", "--state", "random", "--seed", "3"])
        .env("SLOCC_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn curve_csv() {
    let out = slocc(&["curve", "--sym-overlap", "0.5", "--points", "101"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,p_as,p_u,p_m,pbar_s,pU,pbar_tau,p_bound");
    assert_eq!(lines.count(), 101);
}

#[test]
fn bound_from_non_ghz_initial_state() {
    let v = json(&["bound", "--target-overlaps", "0.4,0.5,0.6", "--overlaps", "0.1,0.2,0.2"]);
    assert_eq!(v["bounds"].as_array().unwrap().len(), 2);
    assert!((num(&v, "value") - 0.964730436).abs() < 1e-8);
    let out = slocc(&["bound", "--target-overlaps", "0.4,0.5"]);
    assert!(!out.status.success());
}
