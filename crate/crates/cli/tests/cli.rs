use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chamberwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chamberwalk")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

#[test]
fn coxeter_tables_report() {
    let out = chamberwalk(&["coxeter-tables", "--type", "A2", "--q", "2", "--bound", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "chamberwalk/1");
    assert_eq!(r["results"]["poincare_sum"], "21/8");
    let table = r["results"]["table"].as_array().unwrap();
    let row = table.iter().find(|row| row["lambda"] == serde_json::json!([1, 1])).unwrap();
    assert_eq!(row["n_lambda"], "42");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"type": "A1", "q": 3, "bound": 2}"#).unwrap();
    let out = chamberwalk(&["coxeter-tables", "--config", cfg.to_str().unwrap(), "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["inputs"]["q"], serde_json::json!([2]));
    assert_eq!(r["inputs"]["type"], "A1");
}

#[test]
fn unknown_config_key_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"sead": 4}"#).unwrap();
    let out = chamberwalk(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sead"));
}

#[test]
fn stochastic_command_without_seed() {
    let out = chamberwalk(&["simulate", "--family", "cycle"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn size_guard_exit_code() {
    let out = chamberwalk(&["ball", "--p", "3", "--radius", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn failed_check_exit_code() {
    let out = chamberwalk(&[
        "induce",
        "--family",
        "cycle",
        "--n",
        "6",
        "--subset",
        "0,3",
        "--samples",
        "200",
        "--horizon",
        "1",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let mc = r["checks"].as_array().unwrap().iter().find(|c| c["check"] == "mc_z_score").unwrap();
    assert_eq!(mc["verdict"], false);
}

#[test]
fn empty_verify_passes() {
    let out = chamberwalk(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["checks"], serde_json::json!([]));
}

#[test]
fn unknown_suite() {
    let out = chamberwalk(&["verify", "--suite", "everything"]);
    assert_eq!(out.status.code(), Some(2));
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn csv_output_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        chamberwalk(&["ball", "--p", "2", "--radius", "1", "--format", "csv", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(dir.path(), "ball.csv");
    assert!(csv.starts_with("u,v\n"));
    let json: Value = serde_json::from_str(&read(dir.path(), "ball.json")).unwrap();
    assert_eq!(json["command"], "ball");
    assert!(json["results"]["size"].as_u64().unwrap() > 1);
    assert!(csv.lines().count() > 1);
}

#[test]
fn induce_path_matches_hand_values() {
    let out = chamberwalk(&["induce", "--family", "path", "--n", "3", "--subset", "0,2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    // From 0 the walk goes to 1, then to 0 or 2 with probability 1/2 each.
    assert_eq!(r["results"]["kernel"], serde_json::json!([["1/2", "1/2"], ["1/2", "1/2"]]));
}

#[test]
fn quotient_and_discretize_of_builtin_actions() {
    let out = chamberwalk(&["quotient", "--family", "integers", "--period", "2", "--seed", "3", "--samples", "5000"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["covolume"]["verdict"], "finite");
    let out = chamberwalk(&["discretize", "--family", "free-group", "--rank", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let measure = r["results"]["measure"]["measure"].as_array().unwrap();
    assert_eq!(measure.len(), 4);
    assert!(measure.iter().all(|e| e["prob"] == "1/4"));
}

#[test]
fn quotient_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    let action = dir.path().join("action.json");
    fs::write(&net, r#"{"nodes": [0, 1, 2, 3], "edges": [[0, 1, 1], [1, 2, 1], [2, 3, 1], [3, 0, 1]]}"#).unwrap();
    fs::write(&action, r#"{"generators": [[2, 3, 0, 1]]}"#).unwrap();
    let out = chamberwalk(&["quotient", "--network", net.to_str().unwrap(), "--action", action.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["results"]["quotient"]["nodes"].as_array().unwrap().len(), 2);
}
