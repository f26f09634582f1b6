use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_qentropy");

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("QENTROPY_CHECK_TOL")
        .output()
        .unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn single(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut docs = json_lines(out);
    assert_eq!(docs.len(), 1);
    let doc = docs.pop().unwrap();
    assert_eq!(doc["schema"], "qentropy/1");
    doc
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + b.abs())
}

fn triple(report: &Value) -> (f64, f64, f64) {
    (num(&report["lower"]), num(&report["value"]), num(&report["upper"]))
}

#[test]
fn compute_tsallis_entropy() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.25,0.75]}"#);
    let doc = single(&run(&["compute", arg(&p), "--entropy", "tsallis", "--q", "2"]));
    let r = &doc["results"][0];
    assert_eq!(r["quantity"], "tsallis_entropy");
    assert_eq!(num(&r["params"]["q"]), 2.0);
    assert!(close(num(&r["value"]), 0.375));
}

#[test]
fn compute_kl_of_equal_inputs_is_zero() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", "weight\n0.2\n0.3\n0.5\n");
    let doc = single(&run(&["compute", arg(&p), arg(&p), "--divergence", "kl"]));
    assert_eq!(num(&doc["results"][0]["value"]), 0.0);
}

#[test]
fn compute_renyi_at_one_is_shannon() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.1,0.2,0.7]}"#);
    let doc = single(&run(&[
        "compute", arg(&p), "--entropy", "renyi,shannon", "--q", "1",
    ]));
    let v = &doc["results"];
    assert!(close(num(&v[0]["value"]), num(&v[1]["value"])));
}

#[test]
fn compute_needs_reference_for_divergence() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.5,0.5]}"#);
    let out = run(&["compute", arg(&p), "--divergence", "kl"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compute_rejects_mismatched_lengths() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.5,0.5]}"#);
    let r = write(&dir, "r.json", r#"{"weights":[0.2,0.3,0.5]}"#);
    let out = run(&["compute", arg(&p), arg(&r), "--divergence", "kl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("length mismatch"));
}

#[test]
fn bounds_refined_maxent() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.25,0.75]}"#);
    let doc = single(&run(&["bounds", "--case", "cor3.1", arg(&p), "--q", "2"]));
    let (lo, v, hi) = triple(&doc["report"]);
    assert!(close(lo, 0.0625) && close(v, 0.125) && close(hi, 0.1875));
    assert_eq!(doc["case"], "cor3.1");
    assert_eq!(doc["holds"], true);
    assert!(close(num(&doc["constants"]["n_min_r"]), 0.5));
}

#[test]
fn bounds_cross_entropy_at_equal_inputs_straddles_zero() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.25,0.75]}"#);
    let doc = single(&run(&["bounds", "--case", "thm4.2", arg(&p), arg(&p), "--q", "2"]));
    let (lo, v, hi) = triple(&doc["report"]);
    assert_eq!(v, 0.0);
    assert!(lo <= 0.0 && 0.0 <= hi);
    assert!(num(&doc["constants"]["m"]) <= num(&doc["constants"]["M"]));
    assert_eq!(doc["holds"], true);
}

#[test]
fn bounds_cartwright_field() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.5,0.5]}"#);
    let doc = single(&run(&["bounds", "--case", "cf", arg(&p), "--xs", "1,4"]));
    let (lo, v, hi) = triple(&doc["report"]);
    assert!(close(lo, 0.28125) && close(v, 0.5) && close(hi, 1.125));
}

#[test]
fn bounds_han_on_uniform_square() {
    let dir = TempDir::new().unwrap();
    let j = write(&dir, "j.json", r#"{"dims":[2,2],"cells":[0.25,0.25,0.25,0.25]}"#);
    let doc = single(&run(&["bounds", "--case", "thm5.1", arg(&j), "--q", "2"]));
    let (_, v, hi) = triple(&doc["report"]);
    assert!(close(v, 0.75) && close(hi, 1.0));
}

#[test]
fn bounds_reports_failed_hypothesis_as_usage_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.25,0.75]}"#);
    let out = run(&["bounds", "--case", "thm3.1", arg(&p), "--q", "0.5", "--psi", "log"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis"));
}

#[test]
fn bounds_failure_exits_two() {
    let dir = TempDir::new().unwrap();
    // below q = 1 conditioning can raise the entropy
    let j = write(&dir, "j.json", r#"{"dims":[2,2],"cells":[0.1,0.2,0.3,0.4]}"#);
    let args = ["bounds", "--case", "prop5.3", arg(&j), "--q", "0.5"];
    assert_eq!(run(&args).status.code(), Some(1));
    let out = run(&[&args[..], &["--override-hypothesis"]].concat());
    assert_eq!(out.status.code(), Some(2));
    let doc = &json_lines(&out)[0];
    assert_eq!(doc["holds"], false);
    assert_eq!(doc["informational"], true);
    assert_eq!(run(&["bounds", "--case", "prop5.3", arg(&j), "--q", "2"]).status.code(), Some(0));
}

#[test]
fn tolerance_env_var() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.25,0.75]}"#);
    let with = |tol: &str| {
        Command::new(BIN)
            .args(["bounds", "--case", "cor3.1", arg(&p), "--q", "2"])
            .env("QENTROPY_CHECK_TOL", tol)
            .output()
            .unwrap()
    };
    assert_eq!(with("-1").status.code(), Some(1));
    assert_eq!(with("abc").status.code(), Some(1));
    let doc = single(&with("1e-3"));
    assert_eq!(num(&doc["tolerance"]), 1e-3);
}

#[test]
fn verify_guards_hypothesis() {
    let out = run(&["verify", "--case", "thm5.1", "--q", "0.5", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn verify_override_is_informational() {
    let out = run(&[
        "verify", "--case", "thm5.1", "--q", "0.5", "--trials", "50", "--override-hypothesis",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = &json_lines(&out)[0];
    assert_eq!(doc["informational"], true);
}

#[test]
fn verify_identity_case() {
    let out = run(&["verify", "--case", "id16", "--trials", "100"]);
    let doc = single(&out);
    assert_eq!(doc["case"], "id16");
    assert_eq!(doc["violations"], 0);
    assert_eq!(doc["trials"], 100);
    assert_eq!(doc["seed"], 42);
}

#[test]
fn verify_unknown_case_is_usage_error() {
    let out = run(&["verify", "--case", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_output_is_deterministic() {
    let args = ["verify", "--case", "thm4.2", "--case", "cf", "--trials", "200", "--seed", "7"];
    let a = run(&[&args[..], &["--threads", "1"]].concat());
    let b = run(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_lines(&a).len(), 2);
}

#[test]
fn verify_list_names_every_case() {
    let out = run(&["verify", "--list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["prop2.2", "thm4.2", "cor4.2", "thm5.1", "id14", "id16", "qadd"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}

#[test]
fn echo_round_trips() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", "0.1\n0.2\n0.30000000000000004\n0.39999999999999997\n");
    let first = run(&["echo", arg(&p)]);
    let doc = single(&first);
    let again = write(&dir, "again.json", &String::from_utf8(first.stdout.clone()).unwrap());
    let second = run(&["echo", arg(&again)]);
    assert_eq!(first.stdout, second.stdout);
    let weights: Vec<f64> = serde_json::from_value(doc["weights"].clone()).unwrap();
    assert_eq!(weights, vec![0.1, 0.2, 0.30000000000000004, 0.39999999999999997]);

    let j = write(&dir, "j.json", r#"{"dims":[2,3],"cells":[0.1,0.1,0.1,0.2,0.2,0.3]}"#);
    let first = run(&["echo", arg(&j)]);
    let again = write(&dir, "j2.json", &String::from_utf8(first.stdout.clone()).unwrap());
    assert_eq!(first.stdout, run(&["echo", arg(&again)]).stdout);
}

#[test]
fn parse_errors_name_file_and_line() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.csv", "weight\n0.5\nhalf\n");
    let out = run(&["echo", arg(&p)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(&format!("{}:3:", p.display())), "{err}");

    let p = write(&dir, "bad.json", "{\"weights\": [0.5,\n0.5,]}");
    let err = String::from_utf8(run(&["echo", arg(&p)]).stderr).unwrap();
    assert!(err.contains(&format!("{}:2:", p.display())), "{err}");
}

#[test]
fn invalid_distribution_is_input_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.5,0.6]}"#);
    let out = run(&["compute", arg(&p), "--entropy", "shannon"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum"));
}

#[test]
fn table_output() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"weights":[0.5,0.5]}"#);
    let out = run(&["bounds", "--case", "cf", arg(&p), "--xs", "1,4", "--output", "table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("holds: true"));
}

#[test]
fn help_documents_input_formats() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"weights\"") && text.contains("\"dims\"") && text.contains("weight"));
    assert!(text.contains("QENTROPY_CHECK_TOL"));
}
