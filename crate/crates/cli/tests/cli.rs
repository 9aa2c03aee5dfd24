use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mdrlab::metric::gen::random_metric;
use serde_json::{json, Value};

fn mdrlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdrlab"))
        .args(args)
        .env_remove("MDRLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn stderr_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("json on stderr");
    v["error"]["code"].as_str().expect("code").to_string()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

#[test]
fn jl_dim_reference_values() {
    for (alpha, k) in [("2", 329), ("450", 9)] {
        let v = stdout_json(&mdrlab(&["jl-dim", "--n", "1e9", "--alpha", alpha, "--mode", "gaussian"]));
        assert_eq!(v["k"], k);
    }
}

#[test]
fn domain_errors_exit_two() {
    let out = mdrlab(&["jl-dim", "--n", "10", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_code(&out), "DomainError");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let out = mdrlab(&["jl-dim", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_code(&out), "UsageError");
}

#[test]
fn numbers_have_twelve_significant_digits() {
    let v = stdout_json(&mdrlab(&["psi", "--n", "5", "--k", "2", "--alpha", "2", "--sigma", "3"]));
    let text = v["psi"].to_string();
    assert_eq!(text, "0.333333333333");
}

#[test]
fn verify_suite_and_fault() {
    let ok = mdrlab(&["verify", "jl", "--cases", "20"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let faulted = mdrlab(&["verify", "jl", "--cases", "20", "--fault", "printed-prefactor"]);
    assert_eq!(faulted.status.code(), Some(1));
    let unknown = mdrlab(&["verify", "nope"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn sweep_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_json(
        dir.path(),
        "spec.json",
        &json!({"command": "jl-dim", "grid": {"n": [1000]}, "fixed": {"alpha": 2}}),
    );
    let out = mdrlab(&["sweep", "--spec", spec.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "n,k,sigma,success_prob,union_bound,error");
}

#[test]
fn sweep_jl_grid_monotone_in_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let ns: Vec<String> = (3..=9).map(|e| format!("1e{e}")).collect();
    let spec = write_json(
        dir.path(),
        "spec.json",
        &json!({"command": "jl-dim", "grid": {"n": ns, "alpha": [1.5, 2, 4, 10]}}),
    );
    let path = spec.to_str().unwrap();
    let out = mdrlab(&["sweep", "--spec", path, "--format", "json"]);
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 28);
    for chunk in rows.chunks(4) {
        let ks: Vec<u64> = chunk.iter().map(|r| r["k"].as_u64().unwrap()).collect();
        assert!(ks.windows(2).all(|w| w[0] >= w[1]), "{ks:?}");
    }
    let again = mdrlab(&["sweep", "--spec", path, "--format", "json", "--threads", "3"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn sweep_cell_errors_are_reported_in_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_json(
        dir.path(),
        "spec.json",
        &json!({"command": "jl-dim", "grid": {"alpha": [1, 2]}, "fixed": {"n": 100}}),
    );
    let rows = stdout_json(&mdrlab(&["sweep", "--spec", spec.to_str().unwrap(), "--format", "json"]));
    assert!(rows[0]["error"].as_str().unwrap().starts_with("DomainError"));
    assert!(rows[0]["k"].is_null());
    assert!(rows[1]["error"].is_null());
}

fn metric_json(rows: Vec<Vec<f64>>) -> Value {
    json!({"n": rows.len(), "dist": rows})
}

#[test]
fn pipeline_two_points() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_json(dir.path(), "m.json", &metric_json(vec![vec![0.0, 3.0], vec![3.0, 0.0]]));
    let v = stdout_json(&mdrlab(&["pipeline", "--metric", m.to_str().unwrap(), "--alpha-total", "2"]));
    assert_eq!(v["final_dim"], 1);
    assert_eq!(v["distortion"].as_f64().unwrap(), 1.0);
}

#[test]
fn pipeline_respects_budget() {
    let dir = tempfile::tempdir().unwrap();
    let m = random_metric(64, 5);
    let path = write_json(dir.path(), "m.json", &metric_json(m.rows()));
    let path = path.to_str().unwrap();
    let probe = stdout_json(&mdrlab(&["pipeline", "--metric", path, "--alpha-total", "1e6"]));
    let alpha1 = probe["bourgain_distortion"].as_f64().unwrap();
    let budget = format!("{}", 4.0 * alpha1);
    for seed in 0..20 {
        let v = stdout_json(&mdrlab(&[
            "pipeline", "--metric", path, "--alpha-total", &budget, "--seed", &seed.to_string(),
        ]));
        assert!(v["distortion"].as_f64().unwrap() <= 4.0 * alpha1 * (1.0 + 1e-9), "{v}");
        assert!(v["final_dim"].as_u64().unwrap() <= v["span_dim"].as_u64().unwrap());
    }
}

#[test]
fn pipeline_budget_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let m = random_metric(16, 2);
    let path = write_json(dir.path(), "m.json", &metric_json(m.rows()));
    let out = mdrlab(&["pipeline", "--metric", path.to_str().unwrap(), "--alpha-total", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_code(&out), "BudgetInfeasible");
}

#[test]
fn c2_sdp_four_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = metric_json(vec![
        vec![0., 1., 2., 1.],
        vec![1., 0., 1., 2.],
        vec![2., 1., 0., 1.],
        vec![1., 2., 1., 0.],
    ]);
    let path = write_json(dir.path(), "c4.json", &c4);
    let v = stdout_json(&mdrlab(&["c2-sdp", "--metric", path.to_str().unwrap()]));
    assert!((v["alpha"].as_f64().unwrap() - std::f64::consts::SQRT_2).abs() < 1e-3);
}

#[test]
fn matousek_round_trip_through_signed_metric() {
    let dir = tempfile::tempdir().unwrap();
    let out = mdrlab(&["matousek-gen", "--n", "16", "--g", "4", "--seed", "3"]);
    let template = stdout_json(&out);
    let path = write_json(dir.path(), "t.json", &template["template"]);
    let v = stdout_json(&mdrlab(&["signed-metric", "--template", path.to_str().unwrap(), "--s", "1", "--T", "6"]));
    assert_eq!(v["metric"]["n"], 48);
}

#[test]
fn csv_output_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("out.csv");
    let out = mdrlab(&[
        "harness", "--n", "12", "--g", "4", "--s", "1", "--T", "4", "--trials", "3", "--out",
        file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(file).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("trial,n,g,s,T,"));
}
