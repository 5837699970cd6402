use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const POTTS_Q3: &str = r#"{"kind": "potts", "q": 3, "k": 2, "beta": "1", "J": "1"}"#;
const ISING: &str = r#"{"kind": "potts", "q": 2, "k": 2, "beta": "1/2", "J": "1"}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], model: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cayley-gibbs"))
        .args(args)
        .arg("--model")
        .arg(model)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn potts_classify_reports_family_with_gamma() {
    let dir = TempDir::new().unwrap();
    let out = run(&["classify"], &write(&dir, "m.json", POTTS_Q3));
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["command"], "classify");
    assert_eq!(r["result"]["verdict"], "III_family");
    assert_eq!(r["result"]["generator"], "1");
    let gamma = r["result"]["gamma"].as_f64().unwrap();
    assert!((gamma - (-1.0f64).exp()).abs() < 1e-15);
    assert!(r["result"]["caveat"].as_str().unwrap().contains("not determined"));
    assert_eq!(r["defaults"]["max_den"], 1_000_000);
}

#[test]
fn uniform_markov_chain_is_trace_class() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", r#"{"kind": "markov", "q": 2, "k": 2, "P": [["1/2", "1/2"], ["1/2", "1/2"]]}"#);
    let out = run(&["markov-check"], &m);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "II1");
    assert_eq!(r["result"]["condition"]["holds"], true);
}

#[test]
fn incommensurable_markov_chain_is_refuted() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", r#"{"kind": "markov", "q": 2, "k": 2, "P": [["1/2", "1/2"], ["1/3", "2/3"]]}"#);
    let out = run(&["markov-check"], &m);
    assert_eq!(code(&out), 2);
    assert_eq!(report(&out)["result"]["verdict"], "incommensurable");
}

#[test]
fn markov_check_rejects_other_kinds() {
    let dir = TempDir::new().unwrap();
    let out = run(&["markov-check"], &write(&dir, "m.json", POTTS_Q3));
    assert_eq!(code(&out), 3);
}

#[test]
fn consistent_field_file_passes_and_corrupted_one_fails() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", ISING);
    let good = write(&dir, "good.json", r#"{"a1": [0.0], "a2": [0.0], "a3": [0.0]}"#);
    let bad = write(&dir, "bad.json", r#"{"": [1.0], "a1": [0.0], "a2": [0.0], "a3": [0.0]}"#);
    let ok = run(&["verify-consistency", "--n", "1", "--fields", good.to_str().unwrap()], &m);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(report(&ok)["result"]["pass"], true);
    let broken = run(&["verify-consistency", "--n", "1", "--fields", bad.to_str().unwrap()], &m);
    assert_eq!(code(&broken), 2);
    assert_eq!(report(&broken)["status"], "check-failed");
}

#[test]
fn random_boundary_consistency_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(&["verify-consistency"], &write(&dir, "m.json", POTTS_Q3));
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["result"]["source"], "random-boundary");
    assert_eq!(r["result"]["levels"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_row_sum_names_the_row() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", r#"{"kind": "markov", "q": 2, "k": 2, "P": [[0.5, 0.5], [0.5, 0.49]]}"#);
    let out = run(&["classify"], &m);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 1"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unreadable_model_is_invalid_input() {
    let dir = TempDir::new().unwrap();
    let out = run(&["classify"], &dir.path().join("missing.json"));
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn enumeration_cap_is_enforced() {
    let dir = TempDir::new().unwrap();
    let out = run(&["spectrum", "--n", "2", "--cap", "100"], &write(&dir, "m.json", POTTS_Q3));
    assert_eq!(code(&out), 3);
}

#[test]
fn usage_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", POTTS_Q3);
    assert_eq!(code(&run(&["classify", "--format", "csv"], &m)), 3);
    assert_eq!(code(&run(&["classify", "--tol", "-1"], &m)), 3);
    assert_eq!(code(&run(&["no-such-command"], &m)), 3);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", POTTS_Q3);
    for cmd in ["classify", "solve-fields", "spectrum", "correlations", "check-unordered", "verify-consistency"] {
        let a = run(&[cmd], &m);
        let b = run(&[cmd], &m);
        assert_eq!(code(&a), code(&b));
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn spectrum_lies_on_generator_lattice() {
    let dir = TempDir::new().unwrap();
    let out = run(&["spectrum"], &write(&dir, "m.json", POTTS_Q3));
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["result"]["lattice"]["pass"], true);
    assert_eq!(r["result"]["configurations"], 3u64.pow(10));
}

#[test]
fn correlations_csv_to_file() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", ISING);
    let target = dir.path().join("corr.csv");
    let out = run(&["correlations", "--format", "csv", "--out", target.to_str().unwrap()], &m);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(target).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("distance,max_defect"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn ferromagnetic_ising_has_several_fixed_points() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", r#"{"kind": "potts", "q": 2, "k": 2, "beta": "3", "J": "1"}"#);
    let out = run(&["solve-fields"], &m);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["result"]["contains_zero"], true);
    assert!(r["result"]["count"].as_u64().unwrap() >= 3);
}

#[test]
fn floats_use_fixed_precision() {
    let dir = TempDir::new().unwrap();
    let out = run(&["classify"], &write(&dir, "m.json", POTTS_Q3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"gamma\": 3.6787944117144233e-1"), "{text}");
}

#[test]
fn geometric_chain_has_a_witness() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", r#"{"kind": "markov", "q": 3, "k": 2, "P": [["1/7", "2/7", "4/7"], ["1/7", "2/7", "4/7"], ["1/7", "2/7", "4/7"]]}"#);
    let out = run(&["markov-check"], &m);
    assert_eq!(code(&out), 0);
    let w = &report(&out)["result"]["condition"]["witness"];
    assert_eq!(w["alpha"], "1/2");
    assert_eq!(w["ratio_exponents"][0], serde_json::json!([0, 1, 2]));
}

/// Top-level layout shared by every JSON report.
#[test]
fn every_command_follows_report_schema() {
    let dir = TempDir::new().unwrap();
    let potts = write(&dir, "p.json", POTTS_Q3);
    let markov = write(&dir, "m.json", r#"{"kind": "markov", "q": 2, "k": 2, "P": [["1/2", "1/2"], ["1/4", "3/4"]]}"#);
    let cases = [
        ("classify", &potts, vec!["verdict", "generator", "gamma", "multipliers", "caveat", "confidence", "evidence", "difference_set"]),
        ("check-unordered", &potts, vec!["holds", "residual", "log_row_sums"]),
        ("solve-fields", &potts, vec!["count", "solutions", "residuals", "contains_zero", "non_converged"]),
        ("verify-consistency", &potts, vec!["source", "levels", "max_residual", "pass"]),
        ("spectrum", &potts, vec!["levels", "mirrored_levels", "configurations", "verdict", "lattice"]),
        ("correlations", &potts, vec!["points", "strictly_decreasing"]),
        ("markov-check", &markov, vec!["verdict", "condition"]),
    ];
    for (cmd, model, keys) in cases {
        let out = run(&[cmd], model);
        let r = report(&out);
        let top: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(top, ["command", "defaults", "model", "result", "schema", "settings", "status"], "{cmd}");
        assert_eq!(r["schema"], 1);
        assert_eq!(r["command"], cmd);
        let expected_status = if code(&out) == 0 { "ok" } else { "check-failed" };
        assert_eq!(r["status"], expected_status, "{cmd}");
        for k in keys {
            assert!(r["result"].get(k).is_some(), "{cmd} lacks result.{k}");
        }
        for k in ["cap", "seed", "starts", "max_den"] {
            assert!(r["settings"][k].is_u64(), "{cmd} settings.{k}");
        }
    }
}
