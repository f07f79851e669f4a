use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bernlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bernlab"))
        .args(args)
        .env("BERNLAB_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn result(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    assert_eq!(doc["manifest"]["tool"], "bernlab");
    doc["result"].clone()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn power_spec(dir: &Path, n: usize) -> String {
    let mut coeffs = vec!["[0,0]"; n];
    coeffs.push("[1,0]");
    write(dir, &format!("z{n}.json"), &format!(r#"{{"kind":"polynomial","coeffs":[{}]}}"#, coeffs.join(",")))
}

#[test]
fn norm_of_power() {
    let dir = tempfile::tempdir().unwrap();
    let f = power_spec(dir.path(), 10);
    let v = result(&bernlab(&["norm", "--function", &f, "--functional", "a1-deriv"]))["value"].as_f64().unwrap();
    assert!((v - 2.0 * PI * 10.0 / 11.0).abs() < 1e-9);

    let b = write(dir.path(), "b.json", r#"{"kind":"blaschke","zeros":[[0.5,0],[0,-0.7]]}"#);
    let v = result(&bernlab(&["norm", "--function", &b, "--functional", "hardy", "--p", "4"]))["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-10);
}

#[test]
fn norm_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = power_spec(dir.path(), 3);
    let out_path = dir.path().join("out/norm.json");
    let out = bernlab(&["norm", "--function", &f, "--functional", "hardy", "--p", "2", "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&fs::read_to_string(out_path).unwrap()).unwrap();
    assert!((doc["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f = power_spec(dir.path(), 2);
    assert_eq!(code(&bernlab(&["--help"])), 0);
    assert_eq!(code(&bernlab(&["norm", "--function", &f, "--functional", "nope"])), 64);
    assert_eq!(code(&bernlab(&["frobnicate"])), 64);
    // missing exponent
    assert_eq!(code(&bernlab(&["norm", "--function", &f, "--functional", "hardy"])), 2);
    // unreadable input is an I/O failure
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&bernlab(&["norm", "--function", missing.to_str().unwrap(), "--functional", "hardy", "--p", "2"])), 3);
    let bad = write(dir.path(), "bad.json", r#"{"kind":"blaschke","zeros":[[1.5,0]]}"#);
    assert_eq!(code(&bernlab(&["norm", "--function", &bad, "--functional", "hardy", "--p", "2"])), 2);
    let run = dir.path().join("run");
    let run = run.to_str().unwrap();
    let out = bernlab(&["sweep", "--theorem", "2", "--family", "power", "--n", "4,8", "--sigma", "1", "--alpha", "0.6", "--out", run]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("bernlab: "));
    assert_eq!(code(&bernlab(&["counterexample", "--phi", "one", "--blocks", "3"])), 3);
}

#[test]
fn invalid_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_bernlab"))
        .args(["counterexample", "--phi", "log", "--blocks", "2"])
        .env("BERNLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = bernlab(&[
        "sweep", "--theorem", "1", "--family", "lacunary", "--n", "4..7", "--plot", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("#schema=bernlab-sweep/1;theorem=1;family=lacunary;"));
    assert!(lines.next().unwrap().starts_with("param,n,terms,"));
    assert_eq!(lines.count(), 4);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["result"]["rows"], 4);
    assert!(fs::read_to_string(out_dir.join("sweep.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn valence_and_hayman() {
    let dir = tempfile::tempdir().unwrap();
    let f = power_spec(dir.path(), 4);
    let v = result(&bernlab(&["valence", "--function", &f, "--R", "0.5", "--claim", "4"]));
    assert_eq!(v["pass"], true);
    assert!((v["mean_valence"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let h = result(&bernlab(&["hayman", "--function", &f, "--r", "0.9", "--lambda", "1", "--n", "4"]));
    assert_eq!(h["found"], true);
    let r_tilde = h["r_tilde"].as_f64().unwrap();
    assert!((0.8..=0.9).contains(&r_tilde));
    assert!(h["lhs"].as_f64().unwrap() <= h["rhs"].as_f64().unwrap());
}

#[test]
fn counterexample_and_inverse() {
    let c = result(&bernlab(&["counterexample", "--phi", "log", "--blocks", "4"]));
    let certs = c["report"]["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 4);
    assert!(certs.iter().all(|x| x["pass"] == true));

    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", "[[1,0],[0.5,0],[0.25,0],[0.125,0],[0.0625,0]]");
    let inv = result(&bernlab(&["inverse", "--coeffs", &g, "--weight", "sqrtlog"]));
    assert_eq!(inv["diagnosis"]["verdict"], "converges");
}
