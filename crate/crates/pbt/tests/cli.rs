//! End-to-end tests for the `pbt` binary.

use std::process::{Command, Output};

fn pbt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbt"))
        .args(args)
        .env_remove("PBT_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = pbt(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8")
}

#[test]
fn spectrum_small_case() {
    let s = stdout(&["spectrum", "--n", "2", "--d", "2"]);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "alpha,mu,gamma_num,gamma_den,lambda,degeneracy");
    assert_eq!(lines[1], "1,2,3,1,0.75,2");
    assert_eq!(lines[2], "1,1+1,1,1,0.25,2");
    assert!(lines[3].starts_with("# trace = N*d^N = 8: ok"));
}

#[test]
fn spectrum_json_trace_identity() {
    let s = stdout(&["spectrum", "--n", "5", "--d", "3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(doc["N"], 5);
    assert_eq!(doc["d"], 3);
    assert_eq!(doc["trace_identity"], true);
    assert!(!doc["rows"].as_array().unwrap().is_empty());
}

#[test]
fn perf_known_values() {
    let s = stdout(&["perf", "--n", "3", "--d", "2"]);
    assert!(s.contains("F = 0.625"));
    assert!(s.contains("f = 0.75"));
    assert!(s.contains("p_epr = 13/32 = 0.40625"));
    assert!(s.contains("p_opt = 1/2 = 0.5"));
}

#[test]
fn perf_json_format() {
    let s = stdout(&["perf", "--n", "2", "--d", "3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(doc["p_opt"]["fraction"], "1/5");
    assert_eq!(doc["p_epr"]["fraction"], "1/6");
}

#[test]
fn sweep_csv_header_and_column() {
    let s = stdout(&["sweep", "--d", "2", "--n-min", "1", "--n-max", "5"]);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "d,N,F,f,p_epr,p_opt");
    let p_opt: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(5).unwrap())
        .collect();
    assert_eq!(
        p_opt,
        vec!["0.25", "0.4", "0.5", "0.571428571429", "0.625"]
    );
}

#[test]
fn sweep_multiple_dims_canonical_order() {
    let s = stdout(&[
        "sweep", "--d", "3,2", "--n-min", "2", "--n-max", "4", "--n-step", "2",
        "--quantities", "p_opt",
    ]);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "d,N,p_opt");
    let keys: Vec<(&str, &str)> = lines[1..]
        .iter()
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(keys, vec![("2", "2"), ("2", "4"), ("3", "2"), ("3", "4")]);
}

#[test]
fn sweep_json_mirrors_csv() {
    let s = stdout(&[
        "sweep", "--d", "2", "--n-min", "3", "--n-max", "3", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&s).unwrap();
    let row = &doc.as_array().unwrap()[0];
    assert_eq!(row["d"], 2);
    assert_eq!(row["N"], 3);
    assert_eq!(row["F"], "0.625");
    assert_eq!(row["p_epr"], "0.40625");
}

#[test]
fn precision_bits_env_and_flag() {
    let base = stdout(&["perf", "--n", "4", "--d", "2"]);
    let flagged = stdout(&["perf", "--n", "4", "--d", "2", "--precision-bits", "256"]);
    assert_eq!(base, flagged, "12 significant digits are precision-stable");
    let out = Command::new(env!("CARGO_BIN_EXE_pbt"))
        .args(["perf", "--n", "4", "--d", "2"])
        .env("PBT_PRECISION_BITS", "192")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), base);
    // Below the floor: usage error.
    let out = Command::new(env!("CARGO_BIN_EXE_pbt"))
        .args(["perf", "--n", "4", "--d", "2"])
        .env("PBT_PRECISION_BITS", "32")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_subset_passes() {
    let out = pbt(&["verify", "--checks", "prir", "--max-n", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("prir_sum_rule"));
    assert!(s.contains("0 failed"));
    assert!(!s.contains("spectrum"), "only the requested suite runs");
}

#[test]
fn verify_forced_failure_exits_one() {
    let out = pbt(&[
        "verify", "--checks", "spectrum", "--max-n", "4", "--inject-failure",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("FAIL spectrum_perturbed"));
}

#[test]
fn verify_json_report() {
    let s = stdout(&[
        "verify", "--checks", "spectrum", "--max-n", "4", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["failed"], 0);
    assert!(doc["checks"].as_array().unwrap().len() >= 6);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(pbt(&["nonsense"]).status.code(), Some(2));
    assert_eq!(pbt(&["perf", "--n", "3"]).status.code(), Some(2));
    assert_eq!(pbt(&["perf", "--n", "3", "--d", "1"]).status.code(), Some(2));
    assert_eq!(
        pbt(&["perf", "--n", "3", "--d", "2", "--precision-bits", "16"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        pbt(&["sweep", "--d", "2", "--n-min", "5", "--n-max", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn io_errors_exit_three() {
    let out = pbt(&[
        "perf", "--n", "2", "--d", "2", "--out", "/nonexistent-dir/x.txt",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let s = stdout(&[
        "sweep", "--d", "2", "--n-min", "1", "--n-max", "3",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(s.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("d,N,F,f,p_epr,p_opt\n"));
}

#[test]
fn byte_deterministic_output() {
    for args in [
        vec!["spectrum", "--n", "6", "--d", "2"],
        vec!["perf", "--n", "8", "--d", "3", "--format", "json"],
        vec!["sweep", "--d", "2,3", "--n-min", "1", "--n-max", "8"],
        vec!["verify", "--checks", "spectrum,facts", "--max-n", "5"],
    ] {
        let a = pbt(&args);
        let b = pbt(&args);
        assert_eq!(a.stdout, b.stdout, "stdout differs for {args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}
