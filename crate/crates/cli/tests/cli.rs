use std::io::Write;
use std::process::{Command, Stdio};

use netctrl_cli::run;
use serde_json::Value;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn call(args: &[&str], stdin: &str) -> Outcome {
    let mut argv = vec!["netctrl".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let mut input = stdin.as_bytes();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(&argv, &mut input, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

const S3_INPUT: &str = r#"{"A":[[1,1],[-1,1]],"B":[[1],[0]],"C":[[1,0],[0,1]],"H":[[1,0],[0,1]],
"W":[[0,1],[1,0]],"delta":[1,0],"h":3.141592653589793}"#;

#[test]
fn demo_s1_is_controllable_json() {
    let o = call(&["demo", "s1"], "");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "Controllable");
}

#[test]
fn demo_s4_names_singular_topology() {
    let o = call(&["demo", "s4"], "");
    assert_eq!(o.code, 1);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "Uncontrollable");
    assert_eq!(v["criterion"], "necessary_singular_topology");
}

#[test]
fn missing_file_is_data_error() {
    let o = call(&["analyze", "missing.json"], "");
    assert_eq!(o.code, 65);
    assert!(o.stderr.contains("missing.json"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors() {
    assert_eq!(call(&["frobnicate"], "").code, 64);
    assert_eq!(call(&["demo", "s9"], "").code, 64);
    assert_eq!(call(&["scan", "-", "--h-min", "0.1"], "").code, 64);
    assert_eq!(call(&[], "").code, 64);
}

#[test]
fn malformed_inputs_never_panic() {
    for bad in ["", "{", "[]", "{\"A\":[[1]]}", "{\"A\":[[1,2]],\"B\":[[1]],\"W\":[[0]],\"delta\":[1],\"h\":1}",
        "{\"A\":[[1]],\"B\":[[1]],\"W\":[[0]],\"delta\":[1],\"h\":-1}",
        "{\"A\":[[1]],\"B\":[[1]],\"W\":[[0]],\"delta\":[1],\"h\":1,\"extra\":2}"] {
        let o = call(&["analyze", "-"], bad);
        assert_eq!(o.code, 65, "input {bad:?}: {}", o.stderr);
    }
}

#[test]
fn lenient_turns_unknown_keys_into_warnings() {
    let doc = r#"{"A":[[1]],"B":[[1]],"W":[[0]],"delta":[1],"h":1,"extra":2}"#;
    let o = call(&["analyze", "-", "--lenient"], doc);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stderr.contains("warning"));
}

#[test]
fn stdin_analysis_and_text_format() {
    let o = call(&["analyze", "-", "--format", "text"], S3_INPUT);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("verdict:   Controllable"));
    assert!(o.stdout.contains("pathological_node_sampling"));
}

#[test]
fn invalid_tolerances_are_data_errors() {
    let doc = r#"{"A":[[1]],"B":[[1]],"W":[[0]],"delta":[1],"h":1,"tolerance":{"rank_rel":2.0}}"#;
    assert_eq!(call(&["analyze", "-"], doc).code, 65);
    assert_eq!(call(&["demo", "s1", "--tol-eig=0"], "").code, 65);
}

#[test]
fn multirate_document() {
    let doc = r#"{"A":[[1,0],[1,1]],"B":[[1,0],[0,1]],"C":[[1,0],[0,0]],"H":[[1,0],[0,1]],
"W":[[0,0],[1,0]],"delta":[1,0],"h":0.1,"multirate":{"kind":"TMS","l":2}}"#;
    let o = call(&["analyze", "-"], doc);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["kind"], "TMS");
    assert_eq!(v["l"], 2);
}

#[test]
fn scan_outputs_csv_and_json() {
    let o = call(&["scan", "-", "--h-min", "0.5", "--h-max", "3.5", "--count", "4"], S3_INPUT);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines[0], "h,verdict,criterion,pathological_node");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0.5,"));

    let j = call(&["scan", "-", "--h-min", "0.5", "--h-max", "1", "--count", "2", "--format", "json"], S3_INPUT);
    let v: Value = serde_json::from_str(&j.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);

    let bad = call(&["scan", "-", "--h-min", "2", "--h-max", "1", "--count", "3"], S3_INPUT);
    assert_eq!(bad.code, 65);
}

#[test]
fn discretize_prints_sampled_blocks() {
    let o = call(&["discretize", "-"], S3_INPUT);
    assert_eq!(o.code, 0);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["phi_s"].as_array().unwrap().len(), 4);
    assert_eq!(v["psi_s"][0].as_array().unwrap().len(), 2);
    let t = call(&["discretize", "-", "--format", "text"], S3_INPUT);
    assert!(t.stdout.contains("phi_s ="));
}

#[test]
fn reports_are_deterministic() {
    for id in ["s1", "s2", "s3", "s4"] {
        let a = call(&["demo", id], "");
        let b = call(&["demo", id], "");
        assert_eq!(a.stdout, b.stdout);
        let v: Value = serde_json::from_str(&a.stdout).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&v.to_string()).unwrap(), v);
    }
}

#[test]
fn executable_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_netctrl");
    let status = |args: &[&str]| Command::new(exe).args(args).output().unwrap();
    let s1 = status(&["demo", "s1"]);
    assert_eq!(s1.status.code(), Some(0));
    assert_eq!(status(&["demo", "s4"]).status.code(), Some(1));
    let missing = status(&["analyze", "missing.json"]);
    assert_eq!(missing.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.json"));

    let mut child = Command::new(exe)
        .args(["analyze", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(S3_INPUT.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
