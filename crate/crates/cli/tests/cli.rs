use std::path::Path;
use std::process::Command;

use gausslearn::io::{read_samples_csv, write_samples_csv, ComplexMatrixJson, MatrixJson, StateFile};
use gausslearn_core::linalg::{c, CMat, RMat};
use gausslearn_core::sampling::SampleBatch;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gausslearn"))
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn matrix_json_round_trip() {
    let a = RMat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let j = MatrixJson::from_mat(&a);
    assert_eq!(j.data, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    assert_eq!(j.layout, "row-major");
    let text = serde_json::to_string(&j).unwrap();
    assert_eq!(serde_json::from_str::<MatrixJson>(&text).unwrap().to_mat().unwrap(), a);
    let z = CMat::from_fn(2, 2, |r, k| c(r as f64, k as f64 - 0.5));
    let zj = ComplexMatrixJson::from_mat(&z);
    assert_eq!(zj.im, vec![-0.5, 0.5, -0.5, 0.5]);
    assert_eq!(zj.to_mat().unwrap(), z);
    let bad = MatrixJson { rows: 2, cols: 2, layout: "col-major".into(), data: vec![0.0; 4] };
    assert!(bad.to_mat().is_err());
}

#[test]
fn csv_reload_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let data = RMat::from_row_slice(3, 2, &[0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, -0.0]);
    let batch = SampleBatch { m: 1, data, seed: 7, stream_id: 2 };
    let path = dir.path().join("s.csv");
    write_samples_csv(&path, &batch).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x0,p0\n"));
    assert!(text.contains("-3.3333333333333331e-1"));
    let back = read_samples_csv(&path, 7, 2).unwrap();
    assert!(back.data.iter().zip(batch.data.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"task": "sample", "seeds": []}"#).unwrap();
    let out = bin().args(["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("harness::config"));
    let out = bin().args(["--config", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["--task", "sample", "--eps", "-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_errors_exit_one_with_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("graph.json");
    std::fs::write(
        &cfg,
        r#"{"task": "learn-graph", "kappa": 0.2, "search_budget": 0.5, "noise": {"zeta": 0.0},
            "bounds": {"s": 2.0, "beta_max": 1.0, "beta_min": 0.3, "t_max": 0.0, "delta_deg": 2, "kappa": 0.2}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = bin().args(["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out_dir);
    let err = &r["runs"][0]["error"];
    assert_eq!(err["origin"], "learning::learn_graph");
    assert_eq!(err["kind"], "SearchBudgetExceeded");
    assert_eq!(r["summary"]["exit_code"], 1);
}

#[test]
fn env_var_sets_default_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().env("GAUSSLEARN_OUT", dir.path()).args(["--task", "estimate", "--seed", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["runs"][0]["seed"], 3);
    assert!(dir.path().join("metadata.json").exists());
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn flag_overrides_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--task", "learn-hamiltonian", "--override-l", "2", "--override-zeta", "1e-4", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    let params = &r["runs"][0]["result"]["report"]["params"];
    assert_eq!(params["mode"], "override");
    assert_eq!(params["l"], 2);
    assert_eq!(params["zeta"], 1e-4);
    assert!(params["constants"].as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn inline_and_file_states() {
    let dir = tempfile::tempdir().unwrap();
    let state = StateFile { m: 1, t: vec![0.5, -0.5], v: vec![1.0, 0.0, 0.0, 1.0], h: None };
    let state_path = dir.path().join("state.json");
    std::fs::write(&state_path, serde_json::to_string(&state).unwrap()).unwrap();
    let cfg = dir.path().join("c.json");
    let text = format!(r#"{{"task": "sample", "samples": 50, "state": {{"kind": "file", "path": {:?}}}}}"#, state_path.to_str().unwrap());
    std::fs::write(&cfg, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = bin().args(["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out_dir);
    assert_eq!(r["runs"][0]["properties"][0]["name"], "reload_bit_exact");
    assert_eq!(r["runs"][0]["properties"][0]["held"], true);
    assert!(r["runs"][0]["result"]["state"]["H"].is_array());
    let back = read_samples_csv(&out_dir.join("samples_seed0.csv"), 0, 0).unwrap();
    assert_eq!(back.n(), 50);
}

#[test]
fn verify_bounds_and_benchmark_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("v.json");
    std::fs::write(&cfg, r#"{"task": "verify-bounds", "instances": 30, "seeds": [1, 2]}"#).unwrap();
    let out = bin().args(["--config", cfg.to_str().unwrap(), "--out", dir.path().join("v").to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let lines = std::fs::read_to_string(dir.path().join("v/certificates_seed1.jsonl")).unwrap();
    assert!(lines.lines().count() >= 60);
    assert!(lines.lines().all(|l| serde_json::from_str::<Value>(l).is_ok()));
    let cfg = dir.path().join("b.json");
    std::fs::write(&cfg, r#"{"task": "benchmark", "seeds": [0, 1, 2], "n_grid": [400, 1600, 6400], "replicates": 8}"#).unwrap();
    let out = bin().args(["--config", cfg.to_str().unwrap(), "--out", dir.path().join("b").to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("b/benchmark.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
