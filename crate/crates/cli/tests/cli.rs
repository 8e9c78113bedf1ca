use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn msec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msec")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn lp_prints_exact_alpha() {
    let v = json(&msec(&["lp", "--n", "2"]));
    assert_eq!(v["alpha"], "1/2");
    assert_eq!(v["N"], 2);
    assert_eq!(v["p"].as_array().unwrap().len(), 2);
    let csv = msec(&["lp", "--n", "3", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("i,p_i,p_i_float"));
}

#[test]
fn policy_eval_methods_agree() {
    let exact = json(&msec(&["policy-eval", "--policy", "harmonic", "--N", "5", "--n", "4"]));
    let listed = json(&msec(&["policy-eval", "--policy", "harmonic", "--N", "5", "--n", "4", "--method", "enumerate"]));
    assert_eq!(exact["value"], "12/37");
    assert_eq!(exact["value"], listed["value"]);
    let sim = json(&msec(&[
        "policy-eval",
        "--policy",
        "one-over-e",
        "--n",
        "6",
        "--method",
        "simulate",
        "--trials",
        "20000",
        "--seed",
        "3",
    ]));
    assert_eq!(sim["value"]["trials"], 20000);
    let exact_e = json(&msec(&["policy-eval", "--policy", "one-over-e", "--n", "6"]));
    let p = exact_e["float_value"].as_f64().unwrap();
    let sigma = (p * (1.0 - p) / 20000.0).sqrt();
    assert!((sim["float_value"].as_f64().unwrap() - p).abs() < 4.0 * sigma);
}

#[test]
fn simulate_writes_json_and_csv_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", r#"{"type": "uniform", "n": 8, "r": 2}"#);
    let passing = write(
        dir.path(),
        "pass.json",
        r#"{"matroid": {"file": "m.json"}, "weights": {"model": "linear"},
            "policy": {"name": "alg4"}, "trials": 200, "seed": 1,
            "bound": {"kind": "fraction-of-opt", "value": 0.01, "source": "loose check"}}"#,
    );
    let out = msec(&["simulate", "--config", &passing]);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["bound_source"], "loose check");
    assert_eq!(v["trials"], 200);
    for key in ["config_echo", "mean", "stderr", "bound"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }

    let csv_path = dir.path().join("r.csv");
    let out = msec(&["simulate", "--config", &passing, "--out", csv_path.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "trial,policy,value,opt,ratio,seed");
    assert_eq!(csv.lines().count(), 201);

    let failing = write(
        dir.path(),
        "fail.json",
        r#"{"matroid": {"file": "m.json"}, "weights": {"model": "linear"},
            "policy": {"name": "alg4"}, "trials": 50, "bound": {"kind": "at-least", "value": 100}}"#,
    );
    let out = msec(&["simulate", "--config", &failing]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"matroid": {"type": "graphic", "vertices": 4, "edges": [[0,1],[1,2],[2,3],[3,0],[0,2]]},
            "weights": {"model": "linear"}, "policy": {"name": "threshold-price"}, "trials": 300, "seed": 11}"#,
    );
    let a = msec(&["simulate", "--config", &cfg]);
    let b = msec(&["simulate", "--config", &cfg]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_config_reports_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"matroid": {"type": "uniform", "n": 3, "r": 1}, "weights": {"model": "explicit", "values": [1, 2, 3]},
            "policy": {"name": "alg4"}}"#,
    );
    let out = msec(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("strictly decreasing"));
}

#[test]
fn worstcase_and_principal_seq() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "w.json",
        r#"{"matroid": {"type": "uniform", "n": 4, "r": 1}, "weights": {"model": "linear"},
            "assignment": "identity", "policy": {"name": "alg3", "L": "7/2"}}"#,
    );
    let v = json(&msec(&["worstcase", "--config", &cfg, "--exhaustive"]));
    assert_eq!(v["label"], "exhaustive");
    assert_eq!(v["candidates"].as_array().unwrap().len(), 24);
    assert_eq!(v["report"]["exact"]["value"], "3/1");

    let m = write(dir.path(), "g.json", r#"{"type": "graphic", "vertices": 4, "edges": [[0,1],[1,2],[0,2],[2,3]]}"#);
    let v = json(&msec(&["principal-seq", "--matroid", &m]));
    assert_eq!(v["parts"][0]["density"], "3/2");
    assert_eq!(v["parts"][1]["elements"], serde_json::json!([3]));
}

#[test]
fn hardness_sweep_reports_each_level() {
    let v = json(&msec(&[
        "hardness",
        "--gamma",
        "0.25",
        "--levels",
        "4",
        "--trials",
        "500",
        "--policies",
        "harmonic,threshold:2",
    ]));
    assert_eq!(v["horizon"], 30);
    let policies = v["policies"].as_array().unwrap();
    assert_eq!(policies.len(), 2);
    assert_eq!(policies[1]["policy"], "threshold:2");
    assert_eq!(policies[0]["rows"].as_array().unwrap().len(), 4);
    let bad = msec(&["hardness", "--gamma", "0.5", "--levels", "4"]);
    assert_eq!(bad.status.code(), Some(2));
}
