use std::path::PathBuf;
use std::process::{Command, Output};

fn pmaxent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmaxent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(code(&pmaxent(&["verify", "bogus"])), 2);
}

#[test]
fn verify_all_passes_and_is_deterministic() {
    let args = ["verify", "all", "--seed", "42", "--cases", "200"];
    let a = pmaxent(&args);
    let b = pmaxent(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report.get("wall_time").is_none());
}

#[test]
fn verify_reports_wall_time_on_request() {
    let out = pmaxent(&["verify", "algebra", "--cases", "3", "--timing"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["wall_time"].as_f64().unwrap() >= 0.0);
}

#[test]
fn verify_single_case_replays() {
    let out = pmaxent(&["verify", "maxent", "--seed", "7", "--case", "5"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for check in report["checks"].as_array().unwrap() {
        assert!(check["instances"].as_u64().unwrap() <= 1, "{check}");
    }
}

#[test]
fn verify_writes_out_file() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cramer-rao.json");
    let out = pmaxent(&[
        "verify",
        "cramer-rao",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(report["suite"], "cramer-rao");
    assert_eq!(report["pass"], true);
}

#[test]
fn binomial_curve_has_twenty_decreasing_rows() {
    let args = [
        "curve",
        "--family",
        "binomial:20,0.25",
        "--lambda",
        "5",
        "--grid",
        "0.05:1:0.05",
        "--check",
    ];
    let out = pmaxent(&args);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    assert_eq!(
        csv.lines().next().unwrap(),
        "alpha,H,Lambda,D,dLambda,dD,d2Lambda,d2D,heat_residual"
    );
    let h = column(&csv, "H");
    assert_eq!(h.len(), 20);
    assert!(h.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(out.stdout, pmaxent(&args).stdout);
}

#[test]
fn poisson_curve_is_flat() {
    let out = pmaxent(&["curve", "--family", "poisson:3", "--lambda", "3"]);
    assert_eq!(code(&out), 0);
    let h = column(&stdout(&out), "H");
    assert!(h.iter().all(|v| (v - h[0]).abs() < 1e-12));
}

#[test]
fn curve_checks_a_ulc_json_input() {
    let path = scratch(
        "ulc.json",
        r#"{"probs": [0.2, 0.4, 0.3, 0.1], "deficit": 0.0}"#,
    );
    let out = pmaxent(&["curve", "--input", path.to_str().unwrap(), "--check"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let with_lambda = pmaxent(&[
        "curve",
        "--input",
        path.to_str().unwrap(),
        "--lambda",
        "1.3",
        "--check",
    ]);
    assert_eq!(out.stdout, with_lambda.stdout);
}

#[test]
fn curve_mean_mismatch_is_a_precondition_failure() {
    let out = pmaxent(&["curve", "--family", "binomial:20,0.25", "--lambda", "4"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn curve_check_rejects_non_ulc_input() {
    let path = scratch(
        "bimodal.json",
        r#"{"probs": [0.45, 0.1, 0.45], "deficit": 0.0}"#,
    );
    let out = pmaxent(&["curve", "--input", path.to_str().unwrap(), "--check"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("margin"));
    assert_eq!(
        code(&pmaxent(&["curve", "--family", "geometric:0.5", "--check"])),
        4
    );
}

#[test]
fn malformed_grid_is_a_usage_error() {
    assert_eq!(
        code(&pmaxent(&[
            "curve",
            "--family",
            "poisson:3",
            "--grid",
            "1:0:1"
        ])),
        2
    );
}

#[test]
fn bernoulli_accumulation_improves_tenfold() {
    let out = pmaxent(&["accumulate", "--lambda", "1", "--n", "1,2,4,8,16,32"]);
    assert_eq!(code(&out), 0);
    let tv = column(&stdout(&out), "tv");
    assert_eq!(tv.len(), 6);
    assert!(tv.windows(2).all(|w| w[1] < w[0]));
    assert!(tv[5] * 10.0 <= tv[0]);
}

#[test]
fn poisson_accumulation_stays_at_zero() {
    let out = pmaxent(&["accumulate", "--lambda", "1", "--base", "poisson"]);
    assert_eq!(code(&out), 0);
    assert!(column(&stdout(&out), "tv").iter().all(|&t| t < 1e-10));
}

#[test]
fn accumulation_regression_value() {
    // TV(Binomial(4, 1/2), Poisson(2)) with the full Poisson tail, from mpmath.
    let out = pmaxent(&[
        "accumulate",
        "--lambda",
        "2",
        "--n",
        "1",
        "--base",
        "binomial:4",
    ]);
    assert_eq!(code(&out), 0);
    let tv = column(&stdout(&out), "tv");
    assert!(
        (tv[0] - 0.173_882_389_211_291_03).abs() < 1e-12,
        "{}",
        tv[0]
    );
}

#[test]
fn accumulation_contract_violation_exits_four() {
    assert_eq!(
        code(&pmaxent(&["accumulate", "--lambda", "2", "--n", "1"])),
        4
    );
}

#[test]
fn maxent_probe_examples() {
    let out = pmaxent(&[
        "maxent-probe",
        "--n",
        "4",
        "--lambda",
        "1",
        "--trials",
        "500",
    ]);
    assert_eq!(code(&out), 0);
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["pass"], true);
    let best: Vec<f64> = r["max_entropy_p"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(best.iter().all(|p| (p - 0.25).abs() < 0.1), "{best:?}");
    assert!(r["max_entropy"].as_f64().unwrap() <= r["binomial_entropy"].as_f64().unwrap() + 1e-10);

    let empty = pmaxent(&["maxent-probe", "--n", "3", "--lambda", "1", "--trials", "0"]);
    let r: serde_json::Value = serde_json::from_slice(&empty.stdout).unwrap();
    assert_eq!(
        (r["pass"].clone(), r["max_entropy"].clone()),
        (true.into(), serde_json::Value::Null)
    );

    let single = pmaxent(&[
        "maxent-probe",
        "--n",
        "1",
        "--lambda",
        "0.3",
        "--trials",
        "20",
    ]);
    let r: serde_json::Value = serde_json::from_slice(&single.stdout).unwrap();
    assert_eq!(r["gap"].as_f64(), Some(0.0));
}

#[test]
fn maxent_probe_rejects_lambda_at_n() {
    assert_eq!(
        code(&pmaxent(&["maxent-probe", "--n", "3", "--lambda", "3"])),
        2
    );
}
