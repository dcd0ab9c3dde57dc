use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const NORM_CONFIG: &str = r#"
group = { kind = "lattice", n = 1 }

[grid]
axes = [{ type = "integer", lo = -4, hi = 4 }]

[space]
local = "linf"
window = { lo = [0.0], hi = [0.0] }
global = { kind = "weighted-lp", p = 1.0 }

[[functions]]
kind = "sequence"
entries = [[[0], 1.0], [[1], 1.0]]
"#;

const EXP_CONFIG: &str = r#"
[doubling]
weight = { family = "exponential", rate = 1.0 }
n = 1
"#;

fn wiener(dir: &Path, config: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wiener"));
    if let Some(src) = config {
        let path = dir.join("run.toml");
        std::fs::write(&path, src).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn norm_of_two_deltas_in_ell_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = wiener(dir.path(), Some(NORM_CONFIG), &["norm"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["command"], "norm");
    let row = &r["result"]["values"][0];
    assert!((row["amalgam"].as_f64().unwrap() - 2.0).abs() < 1e-12, "{row}");
    assert!((row["global"].as_f64().unwrap() - 2.0).abs() < 1e-12, "{row}");
}

#[test]
fn exponential_weight_fails_doubling() {
    let dir = tempfile::tempdir().unwrap();
    let out = wiener(dir.path(), Some(EXP_CONFIG), &["doubling"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["passed"], false);
    assert!(!r["result"]["witness"].as_array().unwrap().is_empty());
}

#[test]
fn config_errors_exit_one_with_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = NORM_CONFIG.replace("\"linf\"", "\"lsomething\"");
    let out = wiener(dir.path(), Some(&bad), &["norm"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn missing_section_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = wiener(dir.path(), Some(NORM_CONFIG), &["doubling"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_directory_receives_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let out = wiener(dir.path(), Some(NORM_CONFIG), &["norm", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("norm.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    let csv = std::fs::read_to_string(out_dir.join("norm.csv")).unwrap();
    assert!(csv.starts_with("index,amalgam,global"));
}

#[test]
fn default_verify_is_deterministic_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |o: &Output| {
        let mut v = report(o);
        v.as_object_mut().unwrap().remove("timestamp");
        v
    };
    let a = wiener(dir.path(), None, &["verify", "cor_conv_Lp", "--seed", "7"]);
    let b = wiener(dir.path(), None, &["verify", "cor_conv_Lp", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip(&a), strip(&b));
    let c = strip(&a)["result"]["c_emp"].as_f64().unwrap();
    assert!(c <= 1.0 + 1e-9, "{c}");
}
