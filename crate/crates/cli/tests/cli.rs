use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn esid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esid")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn bound(doc: &Value, name: &str) -> f64 {
    doc["result"]["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["bound"] == name)
        .unwrap()["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn bounds_agree_on_degraded_pair() {
    let path = fixture("degraded_pair.json");
    let doc = json(&esid(&["bounds", "--channel", path.to_str().unwrap(), "--qz", "0.5,0.5", "--restarts", "8"]));
    assert!((bound(&doc, "thm1") - bound(&doc, "prop1")).abs() < 1e-4);
    assert_eq!(doc["result"]["ordering"]["cor1_le_thm1"], true);
    assert_eq!(doc["manifest"]["command"], "bounds");
    assert_eq!(doc["manifest"]["seed"], 0);
}

#[test]
fn bounds_on_reversely_degraded_pair() {
    let path = fixture("rev_degraded.json");
    let out = esid(&[
        "bounds", "--channel", path.to_str().unwrap(), "--qz", "0.5,0.5", "--u-size", "4", "--restarts", "16",
    ]);
    let doc = json(&out);
    assert!(bound(&doc, "cor1") >= 0.4564 - 1e-4);
    assert!((bound(&doc, "thm1") - 0.626784).abs() < 1e-5);
    let prop1 = doc["result"]["results"].as_array().unwrap().iter().find(|r| r["bound"] == "prop1").unwrap();
    assert_eq!(prop1["status"], "infeasible");

    let strict = esid(&[
        "bounds", "--channel", path.to_str().unwrap(), "--qz", "0.5,0.5", "--restarts", "2", "--require-feasible",
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn malformed_channel_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"input": ["0","1"], "output": ["0","1"], "rows": [[0.5, 0.4], [0.1, 0.9]]}"#).unwrap();
    let out = esid(&["degraded", "--channel", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(esid(&["dalpha", "--p", "0.5,0.5", "--q", "0.5,0.5", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(esid(&["bounds", "--base", "decibels"]).status.code(), Some(2));
}

#[test]
fn example_curves_cross_at_half() {
    let out = esid(&["example", "--q", "0.125", "--eps-critical"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("p_u2,i_xy,i_xz,i_uy,i_uz"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 101);
    let mid = rows.iter().find(|r| r[0] == 0.5).unwrap();
    assert!((mid[3] - mid[4]).abs() < 1e-9);
    assert!((mid[3] - 0.456436).abs() < 1e-6);
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(summary["result"]["cross_check"].as_f64().unwrap() < 1e-12);
}

#[test]
fn example_limits() {
    let rows = csv_rows(&String::from_utf8(esid(&["example", "--q", "0", "--eps", "0.7", "--grid", "11"]).stdout).unwrap());
    assert!(rows.iter().all(|r| (r[1] - r[3]).abs() < 1e-12));
    let rows = csv_rows(&String::from_utf8(esid(&["example", "--q", "0.5", "--eps", "0.7", "--grid", "11"]).stdout).unwrap());
    assert!(rows.iter().all(|r| r[4].abs() < 1e-12));
}

#[test]
fn example_writes_files_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let svg = dir.path().join("sweep.svg");
    let out = esid(&[
        "example", "--q", "0.125", "--eps", "0.6866", "--grid", "5", "--base", "nats",
        "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    let doc = json(&out);
    assert_eq!(csv_rows(&std::fs::read_to_string(&csv).unwrap()).len(), 5);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
    let i_xz = doc["result"]["report"]["i_xz"].as_f64().unwrap();
    assert!((i_xz - std::f64::consts::LN_2).abs() < 1e-12);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn degradedness_verdicts() {
    let doc = json(&esid(&["degraded", "--channel", fixture("degraded_pair.json").to_str().unwrap()]));
    assert_eq!(doc["result"]["degraded"], true);
    let doc = json(&esid(&["degraded", "--channel", fixture("rev_degraded.json").to_str().unwrap()]));
    assert_eq!(doc["result"]["degraded"], false);
}

#[test]
fn dalpha_in_bits() {
    let doc = json(&esid(&["dalpha", "--p", "0.5,0.5", "--q", "0.25,0.75", "--alpha", "0.7"]));
    assert!((doc["result"]["d_alpha"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn idcode_eval_and_lemma1() {
    let code = fixture("toy_code.json");
    let chan = fixture("bsc01.json");
    let doc = json(&esid(&["idcode", "eval", "--code", code.to_str().unwrap(), "--channel", chan.to_str().unwrap()]));
    assert!((doc["result"]["lambda1"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert!((doc["result"]["lambda2"].as_f64().unwrap() - 0.1).abs() < 1e-12);

    let doc = json(&esid(&["idcode", "lemma1", "--code", code.to_str().unwrap(), "--channel", chan.to_str().unwrap()]));
    let d = &doc["result"]["dalpha"];
    assert!(d["loglog_m"].as_f64().unwrap() <= d["bound"].as_f64().unwrap());
    assert_eq!(d["holds"], true);
}

#[test]
fn generated_codes_are_deterministic_and_stealthy() {
    let a = esid(&["idcode", "generate", "--m", "4", "--n", "2", "--seed", "3"]);
    let b = esid(&["idcode", "generate", "--m", "4", "--n", "2", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("code.json");
    std::fs::write(&code, &a.stdout).unwrap();
    let doc = json(&esid(&[
        "idcode", "stealth", "--code", code.to_str().unwrap(), "--channel", fixture("bsc01.json").to_str().unwrap(),
        "--qz", "0.5,0.5",
    ]));
    assert!(doc["result"]["stealth_delta"].as_f64().unwrap().is_finite());
}

#[test]
fn oversized_blocklength_hits_the_cap() {
    assert_eq!(esid(&["idcode", "generate", "--m", "2", "--n", "25"]).status.code(), Some(3));
}

#[test]
fn quick_check_suites_pass() {
    for suite in ["measures", "stealth-chain"] {
        let out = esid(&["check", "--suite", suite, "--count", "20", "--seed", "7"]);
        let doc = json(&out);
        assert_eq!(doc["result"]["passed"], true, "{suite}");
    }
}
