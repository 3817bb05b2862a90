use std::process::{Command, Output};

use exactq::extract::QueryAlgorithm;
use exactq::simulate::min_success;
use exactq::BooleanFunction;

fn exactq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exactq"))
        .args(args)
        .env_remove("EXACTQ_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn two_bit_sweep() {
    let out = exactq(&["sweep", "--n", "2", "--quiet"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "id,name,t1,deg_f2,D,q_na\n1,AND,0.900,2,2,2\n6,PARITY,1*,1,2,1\n"
    );
}

#[test]
fn three_bit_sweep_has_ten_rows() {
    let out = exactq(&["sweep", "--n", "3", "--quiet"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.contains(&"1,AND,0.800,0.980,3,3,3"));
    assert!(rows.contains(&"27,SEL,0.854,1,2,2,3"));
    assert!(rows.contains(&"105,PARITY,0.500,1*,1,3,2"));
}

#[test]
fn sweep_is_deterministic_across_job_counts() {
    let one = exactq(&["sweep", "--n", "3", "--quiet", "--format", "json"]);
    let two = exactq(&["sweep", "--n", "3", "--quiet", "--format", "json", "--jobs", "2"]);
    assert_eq!(one.stdout, two.stdout);
    let rows: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 10);
    let raw = rows[0]["cells"][0]["success"].as_f64().unwrap();
    assert!((raw - 0.8).abs() < 1e-4);
}

#[test]
fn analyze_majority() {
    let out = exactq(&["analyze", "--n", "3", "--id", "23", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().nth(1), Some("23,MAJ,0.667,1,2,3,3"));
}

#[test]
fn analyze_exact_two_on_four_bits() {
    let out = exactq(&["analyze", "--n", "4", "--family", "EXACT_2", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().nth(1), Some("5736,EXACT_2,0.571,1,1*,3,4,3"));
}

#[test]
fn analyze_single_variable() {
    let out = exactq(&["analyze", "--n", "1", "--id", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("D          1"));
    assert!(text.contains("t=1        1*"));
}

#[test]
fn analyze_report_lists_class() {
    let out = exactq(&["analyze", "--n", "3", "--family", "NAE"]);
    let text = stdout(&out);
    assert!(text.contains("symmetric  palindromic"));
    assert!(text.contains("q_na       2"));
}

#[test]
fn emitted_algorithm_is_exact() {
    let path = std::env::temp_dir().join(format!("exactq-emit-{}.json", std::process::id()));
    let out = exactq(&["analyze", "--n", "3", "--id", "22", "--emit", path.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let alg = QueryAlgorithm::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(alg.t(), 2);
    let f = BooleanFunction::from_id_u64(3, 22).unwrap();
    assert!(min_success(&alg, &f).unwrap() > 0.999);
}

#[test]
fn invalid_id_is_a_usage_error() {
    let out = exactq(&["analyze", "--n", "3", "--id", "300"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn oversized_full_sweep_suggests_symmetric_mode() {
    let out = exactq(&["sweep", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--symmetric-only"));
}

#[test]
fn invalid_tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_exactq"))
        .args(["analyze", "--n", "2", "--id", "1"])
        .env("EXACTQ_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn default_verification_passes() {
    let out = exactq(&["verify"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert!(text.contains("fixture 7"));
    assert!(text.contains("balanced n=8"));
}

#[test]
fn candidate_count() {
    let out = exactq(&["verify", "--search-5bit", "--count-only"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("13608 candidates"));
}

#[test]
fn nonadaptive_checks_on_three_bits() {
    let out = exactq(&["verify", "--n", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("PASS nonadaptive algorithms n=3: 14 classes"));
    assert!(text.contains("PASS symmetric classification n=3: 16 functions"));
}

#[test]
fn tight_fixture_tolerance_fails() {
    let out = exactq(&["verify", "--fixtures", "--tol", "1e-20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL fixture"));
}

#[test]
fn symmetric_sweep_of_five_bits_lists_nineteen_rows() {
    let out = exactq(&["sweep", "--n", "5", "--symmetric-only", "--t", "1", "--quiet"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 20);
    assert!(text.contains("\"SYM(0,0,0,0,0,1)\",0.692"));
}
