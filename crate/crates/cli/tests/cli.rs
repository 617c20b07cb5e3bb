use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mermin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mermin"))
        .args(args)
        .env_remove("MERMIN_THREADS")
        .output()
        .expect("spawn mermin")
}

fn report(args: &[&str]) -> Value {
    let out = mermin(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_inputs(dir: &TempDir, n: usize, kind: &str) -> (PathBuf, PathBuf) {
    let settings = path(dir, "settings.json");
    let state = path(dir, &format!("{kind}.json"));
    let n = n.to_string();
    report(&["gen-settings", "--n", &n, "--out", s(&settings)]);
    report(&["gen-state", "--n", &n, "--kind", kind, "--out", s(&state)]);
    (settings, state)
}

#[test]
fn build_both_forms_agree_and_norm_is_four() {
    let dir = TempDir::new().unwrap();
    let (settings, _) = gen_inputs(&dir, 3, "ghz");
    let (p, e) = (path(&dir, "p.json"), path(&dir, "e.json"));
    report(&["build", "--settings", s(&settings), "--form", "product", "--out", s(&p)]);
    report(&["build", "--settings", s(&settings), "--form", "expansion", "--out", s(&e)]);
    let read = |f: &Path| -> Vec<[f64; 2]> {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(f).unwrap()).unwrap();
        assert_eq!(v["schema"], "mermin.operator/v1");
        serde_json::from_value(v["entries"].clone()).unwrap()
    };
    let diff = read(&p)
        .iter()
        .zip(read(&e))
        .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
        .fold(0.0, f64::max);
    assert!(diff < 1e-12);
    let r = report(&["norm", "--operator", s(&p)]);
    assert!((r["outputs"]["norm"].as_f64().unwrap() - 4.0).abs() < 1e-10);
}

#[test]
fn dense_cap_exits_three() {
    let dir = TempDir::new().unwrap();
    let settings = path(&dir, "s13.json");
    report(&["gen-settings", "--n", "13", "--out", s(&settings)]);
    let out = mermin(&["build", "--settings", s(&settings), "--out", s(&path(&dir, "o.json"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n <= 12"));
}

#[test]
fn lhv_reports_bound() {
    let r = report(&["lhv", "--n", "3"]);
    assert_eq!(r["outputs"]["max_value"], 2);
    assert_eq!(r["outputs"]["violation_ratio"], 2.0);
    assert_eq!(mermin(&["lhv", "--n", "11"]).status.code(), Some(3));
}

#[test]
fn extract_on_ghz_returns_identities() {
    let dir = TempDir::new().unwrap();
    let (settings, state) = gen_inputs(&dir, 4, "ghz");
    let r = report(&["extract", "--state", s(&state), "--settings", s(&settings)]);
    let out = &r["outputs"];
    assert!(out["fidelity_residual"].as_f64().unwrap() < 1e-10);
    let us: Vec<[[[f64; 2]; 2]; 2]> = serde_json::from_value(out["unitaries"].clone()).unwrap();
    for u in us {
        let id = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]];
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..2 {
                    assert!((u[r][c][k] - id[r][c][k]).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn extract_rejects_non_maximal_state() {
    let dir = TempDir::new().unwrap();
    let (settings, state) = gen_inputs(&dir, 3, "w");
    let out = mermin(&["extract", "--state", s(&state), "--settings", s(&settings)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_identities_passes() {
    let r = report(&["verify-identities", "--n", "5", "--trials", "100", "--seed", "9"]);
    assert_eq!(r["outputs"]["all_pass"], true);
    assert!(r["outputs"]["max_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["seeds"], serde_json::json!([9]));
}

#[test]
fn malformed_files_give_line_anchored_diagnostics() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    let cases = [
        // non-unit vector on line 3
        "{\"schema\":\"mermin.settings/v1\",\"n\":2,\n\"pairs\":[{\"a\":[1,0,0],\"a_prime\":[0,1,0]},\n{\"a\":[1,1,0],\"a_prime\":[0,1,0]}]}",
        // syntax error
        "{\"schema\":\"mermin.settings/v1\",\n\"n\":2,\n\"pairs\":[",
        // count mismatch
        "{\"schema\":\"mermin.settings/v1\",\n\"n\":3,\n\"pairs\":[{\"a\":[1,0,0],\"a_prime\":[0,1,0]},{\"a\":[1,0,0],\"a_prime\":[0,1,0]}]}",
        // wrong schema
        "{\"schema\":\"mermin.state/v1\",\"n\":2,\"pairs\":[]}",
    ];
    let expected_lines = [3, 3, 2, 1];
    for (text, line) in cases.iter().zip(expected_lines) {
        std::fs::write(&bad, text).unwrap();
        let out = mermin(&["quantum-max", "--settings", s(&bad)]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        let anchor = format!("{}:{line}:", s(&bad));
        assert!(err.contains(&anchor), "{err}");
    }
    assert_eq!(mermin(&["norm", "--operator", s(&path(&dir, "missing.json"))]).status.code(), Some(2));
}

#[test]
fn state_files_are_validated() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "state.json");
    std::fs::write(&bad, "{\"schema\":\"mermin.state/v1\",\"n\":2,\n\"amplitudes\":[[1,0],[1,0],[0,0],[0,0]]}").unwrap();
    let (settings, _) = gen_inputs(&dir, 2, "ghz");
    let out = mermin(&["sample", "--state", s(&bad), "--settings", s(&settings), "--shots", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let (settings, state) = gen_inputs(&dir, 3, "random");
    let rep = path(&dir, "report.json");
    let args = [
        "sample", "--state", s(&state), "--settings", s(&settings), "--shots", "5000", "--seed", "7",
    ];
    let a = report(&args);
    let mut with_threads = vec!["--threads", "1", "--report", s(&rep)];
    with_threads.extend(args);
    let b = report(&with_threads);
    assert_eq!(a["outputs"], b["outputs"]);
    assert_eq!(a["inputs_digest"], b["inputs_digest"]);
    let stored: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(stored["outputs"], b["outputs"]);
    assert_eq!(stored["schema"], "mermin.report/v1");
    for key in ["command", "tool_version", "inputs_digest", "parameters", "outputs", "seeds", "wall_time_seconds"] {
        assert!(stored.get(key).is_some(), "missing {key}");
    }
    let v = a["outputs"]["value"].as_f64().unwrap();
    let exact = a["outputs"]["exact_value"].as_f64().unwrap();
    let se = a["outputs"]["std_error"].as_f64().unwrap();
    assert!((v - exact).abs() <= 5.0 * se + 1e-12);
}

#[test]
fn seesaw_finds_ghz_maximum_and_writes_settings() {
    let dir = TempDir::new().unwrap();
    let (settings, state) = gen_inputs(&dir, 3, "ghz");
    let best = path(&dir, "best.json");
    let r = report(&[
        "seesaw", "--state", s(&state), "--settings", s(&settings), "--restarts", "4", "--settings-out", s(&best),
    ]);
    assert!((r["outputs"]["best_value"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    let q = report(&["quantum-max", "--settings", s(&best)]);
    assert!((q["outputs"]["max_eigenvalue"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn csv_output_is_a_table() {
    let out = mermin(&["--csv", "lhv", "--n", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,max_value,bound_formula,quantum_bound,violation_ratio"));
    assert_eq!(lines.next(), Some("4,4,4,8,2"));
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_mermin"))
        .args(["lhv", "--n", "5"])
        .env("MERMIN_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_mermin"))
        .args(["lhv", "--n", "5"])
        .env("MERMIN_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(mermin(&["sample", "--shots", "many"]).status.code(), Some(2));
    assert_eq!(mermin(&["no-such-command"]).status.code(), Some(2));
}
