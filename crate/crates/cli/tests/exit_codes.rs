use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn copekit(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_copekit"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn generate(theory: &str, extra: &[&str]) -> Vec<u8> {
    let mut args = vec!["generate", "--theory", theory];
    args.extend(extra);
    let out = copekit(&args, b"");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn spekkens_certifies_noncontextual() {
    let out = copekit(&["certify"], &generate("spekkens", &[]));
    assert_eq!(out.status.code(), Some(0));
    let cert = json(&out.stdout);
    assert_eq!(cert["verdict"], "Noncontextual");
    assert_eq!(cert["evidence"]["model"]["inner_dim"], 4);
}

#[test]
fn boxworld_certifies_contextual() {
    let out = copekit(&["certify"], &generate("boxworld", &[]));
    assert_eq!(out.status.code(), Some(10));
    assert_eq!(json(&out.stdout)["evidence_kind"], "VertexForcing");
}

#[test]
fn qubit_certifies_contextual() {
    let out = copekit(&["certify"], &generate("qubit", &[]));
    assert_eq!(out.status.code(), Some(10));
    assert_eq!(json(&out.stdout)["evidence_kind"], "SpernerSeparation");
}

#[test]
fn float_boxworld_is_undetermined() {
    let out = copekit(&["certify", "--max-k", "4"], &generate("boxworld", &["--backend", "float"]));
    assert_eq!(out.status.code(), Some(20));
    assert_eq!(json(&out.stdout)["searched_k_range"], serde_json::json!([3, 4]));
}

#[test]
fn corrupted_documents_fail_validation() {
    let mut doc = json(&generate("spekkens", &[]));
    doc["blocks"][0][0][0] = "1/2".into();
    let out = copekit(&["validate"], doc.to_string().as_bytes());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column"));
    assert_eq!(copekit(&["validate"], b"{ not json").status.code(), Some(2));
    assert_eq!(copekit(&["validate"], &generate("spekkens", &[])).status.code(), Some(0));
}

#[test]
fn exceeding_the_exhaustive_guard_exits_3() {
    let out = copekit(&["certify", "--exhaustive-k", "3"], &generate("extended-boxworld", &[]));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("guard"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(copekit(&["certify", "--bogus"], b"").status.code(), Some(2));
    assert_eq!(copekit(&["frobnicate"], b"").status.code(), Some(2));
    assert_eq!(copekit(&["generate", "--theory", "hilbert"], b"").status.code(), Some(2));
    assert_eq!(copekit(&["certify", "/no/such/file.json"], b"").status.code(), Some(2));
}

#[test]
fn factorize_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("spekkens.json");
    std::fs::write(&matrix, generate("spekkens", &[])).unwrap();
    let matrix = matrix.to_str().unwrap();
    for kind in ["pregpt", "gpt", "quasi", "trivial", "nmf", "enmf"] {
        let model = dir.path().join(format!("{kind}.json"));
        let model = model.to_str().unwrap();
        let out = copekit(&["factorize", matrix, "--kind", kind, "--output", model], b"");
        assert_eq!(out.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        let out = copekit(&["verify", matrix, "--model", model], b"");
        assert_eq!(out.status.code(), Some(0), "{kind}");
    }
    // The Spekkens GPT is not an ontological model of the boxworld matrix.
    let gpt = dir.path().join("gpt.json");
    let out = copekit(&["verify", "--model", gpt.to_str().unwrap()], &generate("boxworld", &[]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn restrict_quotient_and_merge_write_matrices() {
    let out = copekit(&["restrict", "--preparations", "0,1,2,3", "--measurements", "0,1"], &generate("spekkens", &[]));
    assert_eq!(out.status.code(), Some(0));
    let frag = json(&out.stdout);
    assert_eq!(frag["preparations"].as_array().unwrap().len(), 4);
    assert_eq!(frag["blocks"][1][0][0], "1/2");

    let out = copekit(&["quotient"], &generate("extended-boxworld", &[]));
    assert_eq!(json(&out.stdout)["preparations"].as_array().unwrap().len(), 5);

    let out = copekit(&["merge"], &generate("boxworld", &[]));
    assert_eq!(json(&out.stdout)["measurements"].as_array().unwrap().len(), 1);
}

#[test]
fn info_reports_rank_and_tomography_flags() {
    let out = copekit(&["info"], &generate("spekkens", &[]));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rank: 4"));
    assert!(text.contains("preparations exceed rank: true"));
}

#[test]
fn output_bytes_are_deterministic() {
    assert_eq!(generate("qubit", &[]), generate("qubit", &[]));
    let strip = |out: Output| {
        let mut v = json(&out.stdout);
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    let input = generate("spekkens", &[]);
    assert_eq!(strip(copekit(&["certify", "--seed", "5"], &input)), strip(copekit(&["certify", "--seed", "5"], &input)));
}
