use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use monodromy_lab::error::{EXIT_COMPUTATION, EXIT_PRECISION, EXIT_SCHEMA};
use monodromy_lab::report::canonical_json;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monodromy-lab"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn run_file(path: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(path).args(extra).output().unwrap()
}

fn run_text(doc: &str) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, doc).unwrap();
    run_file(&path, &[])
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn ladder_example() {
    let out = run_file(&scenarios().join("ladder_m1_p2.json"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["valuations"], serde_json::json!(["1", "1/2", "1/4", "1/8"]));
    assert_eq!(v["result"]["n0"], 1);
    assert_eq!(v["status"], "ok");
}

#[test]
fn json_output_is_deterministic() {
    for name in ["ladder_elliptic_p2.json", "clifford_type2_n2.json", "galois_full_3_1_4.json"] {
        let a = run_file(&scenarios().join(name), &[]);
        let b = run_file(&scenarios().join(name), &[]);
        assert_eq!(a.stdout, b.stdout, "{name}");
        let text = String::from_utf8(a.stdout).unwrap();
        assert_eq!(canonical_json(&serde_json::from_str(&text).unwrap()), text.trim_end_matches('\n'));
    }
}

#[test]
fn exit_code_contract() {
    let schema = run_text(r#"{"kind":"ladder","p":6,"interior":{"1":1},"n_max":2}"#);
    assert_eq!(schema.status.code(), Some(EXIT_SCHEMA));
    assert!(schema.stdout.is_empty());
    let malformed = run_text("{not json");
    assert_eq!(malformed.status.code(), Some(EXIT_SCHEMA));
    let compute = run_text(r#"{"kind":"classify","torus_rank":1,"abelian":"none","dimension":3}"#);
    assert_eq!(compute.status.code(), Some(EXIT_COMPUTATION));
    assert_eq!(json(&compute)["error"]["class"], "computation");
    let precision = run_text(r#"{"kind":"tate","p":2,"periods":["O(t^3)"],"n":1}"#);
    assert_eq!(precision.status.code(), Some(EXIT_PRECISION));
    assert_eq!(json(&precision)["error"]["class"], "precision");
    for out in [schema, malformed, compute, precision] {
        assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
    }
}

#[test]
fn text_format_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.txt");
    let out =
        run_file(&scenarios().join("ladder_m3_p3.json"), &["--format", "text", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("v_n") && text.contains("3/2") && text.contains("1/18"));
    assert!(text.trim_end().ends_with("status: ok"));
}

#[test]
fn batch_matches_goldens() {
    let out = bin().arg("batch").arg(scenarios()).arg("--golden").arg(scenarios().join("golden")).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.ends_with("golden match")).count(), stdout.lines().count());
}

#[test]
fn batch_reports_worst_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(scenarios().join("ladder_m1_p2.json"), dir.path().join("a.json")).unwrap();
    std::fs::write(dir.path().join("b.json"), r#"{"kind":"galois","p":3,"n":1,"size":3}"#).unwrap();
    let out = bin().arg("batch").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_SCHEMA));
}
