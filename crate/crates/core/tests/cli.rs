//! End-to-end runs of the binary's entry point on small inputs.

use std::fs;

use patchflow::cli::run_from;
use patchflow::io::{read_table, sidecar_path};

fn run(args: &[&str]) -> i32 {
    run_from(std::iter::once("patchflow").chain(args.iter().copied()))
}

#[test]
fn radius_certify_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(run(&["radius", "certify", "--alpha", "1", "--K", "1", "--out", out.to_str().unwrap()]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let t = v["T_star"].as_f64().unwrap();
    assert!((t - 0.08786).abs() < 1e-5);
    assert_eq!(v["per_order_table"].as_array().unwrap().len(), 12);
}

#[test]
fn transform_eval_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    fs::write(&pts, "re_z,im_z\n0.3,0.1\n2,0\n").unwrap();
    let out = dir.path().join("vals.csv");
    assert_eq!(run(&["transform", "eval", "--amplitude", "1", "--points", pts.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let (cols, rows) = read_table(&out).unwrap();
    assert_eq!(cols, ["re_z", "im_z", "side", "re_cauchy", "im_cauchy", "re_beurling", "im_beurling"]);
    let f = |r: usize, c: usize| rows[r][c].parse::<f64>().unwrap();
    assert!((f(0, 3) - 0.3).abs() < 1e-8 && (f(0, 4) - 0.1).abs() < 1e-8);
    assert!((f(1, 3) - 0.5).abs() < 1e-8 && (f(1, 5) + 0.25).abs() < 1e-8);
    assert!(sidecar_path(&out).exists());
}

#[test]
fn series_build_then_flow() {
    let dir = tempfile::tempdir().unwrap();
    let ser = dir.path().join("series");
    let s = ser.to_str().unwrap();
    assert_eq!(run(&["series", "build", "--backend", "analytic", "--order", "3", "--out", s]), 0);
    let csvs = fs::read_dir(&ser).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv")).count();
    assert_eq!(csvs, 4);
    let manifest = fs::read_to_string(ser.join("manifest.json")).unwrap();

    // same config, same bytes
    let again = dir.path().join("again");
    assert_eq!(run(&["series", "build", "--backend", "analytic", "--order", "3", "--out", again.to_str().unwrap()]), 0);
    assert_eq!(manifest, fs::read_to_string(again.join("manifest.json")).unwrap());

    let traj = dir.path().join("traj.csv");
    assert_eq!(run(&["flow", "trace", "--series", s, "--times", "0:0.1:0.3", "--out", traj.to_str().unwrap()]), 0);
    let (_, rows) = read_table(&traj).unwrap();
    assert_eq!(rows.len(), 4 * 64);

    let rep = dir.path().join("v.json");
    assert_eq!(run(&["flow", "validate", "--series", s, "--probes", "10", "--out", rep.to_str().unwrap()]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(v["newton"]["failures"].as_u64(), Some(0));

    assert_eq!(run(&["radius", "certify", "--from-series", s]), 0);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("d.cfg");
    fs::write(&bad, "kind = hexagon\n").unwrap();
    assert_eq!(run(&["transform", "jump-verify", "--domain", bad.to_str().unwrap()]), 2);
    assert_eq!(run(&["series", "build", "--order", "0"]), 2);
    assert_eq!(run(&["flow", "trace", "--series", dir.path().join("none").to_str().unwrap()]), 2);
    assert_eq!(run(&["suite", "run", "--only", "11"]), 2);
}
