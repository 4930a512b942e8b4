//! Black-box tests of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jacobi-gap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn parse_csv(text: &str) -> Vec<Vec<f64>> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,phi,t,E,nu"), "missing header");
    lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn series_uniform_density_on_interior_rows() {
    let out = run(&[
        "--method", "series", "--a", "-1/2", "--b", "-1/2", "--N", "1", "--degree", "50",
    ]);
    assert!(out.status.success());
    let rows = parse_csv(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(rows.len(), 401);
    // nu is identically 1/pi; trust the series through its validated range
    // t <= 0.9 (theta >= 0.2048) and up to the guarded endpoint row
    for row in &rows {
        let (theta, nu) = (row[0], row[4]);
        if theta >= 0.205 && theta <= 0.9999 {
            assert!(
                (nu - std::f64::consts::FRAC_1_PI).abs() <= 1e-8,
                "theta {theta}: nu {nu}"
            );
        }
    }
}

#[test]
fn compare_agrees_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("cmp.csv");
    let out = run(&[
        "--method", "compare", "--a", "0", "--b", "0", "--N", "2",
        "--degree", "100", "--output", csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "exit: {:?}", out.status);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "agree");
    assert_eq!(report["rk_status"], "ok");
    assert!(report["sup_diff_nu"].as_f64().unwrap() <= 5e-3);
    let rows = parse_csv(&std::fs::read_to_string(&csv_path).unwrap());
    assert!(!rows.is_empty());
}

#[test]
fn rk_warns_for_positive_a() {
    let out = run(&["--method", "rk", "--a", "0.5", "--b", "-0.5", "--N", "2"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("a > 0"), "stderr: {err}");
}

#[test]
fn compare_disagrees_with_exit_code_4() {
    let out = run(&[
        "--method", "compare", "--a", "0.5", "--b", "-0.5", "--N", "2", "--degree", "60",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["verdict"], "disagree");
}

#[test]
fn glue_outputs_report_and_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("glue.csv");
    let out = run(&[
        "--method", "glue", "--a", "-1/2", "--b", "-1/2", "--N", "1",
        "--degree", "50", "--output", csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["method"], "glued");
    assert_eq!(report["seams"].as_array().unwrap().len(), 2);
    let mass = report["integral_nu_dphi"].as_f64().unwrap();
    assert!((mass - 1.0).abs() <= 5e-3);
    let rows = parse_csv(&std::fs::read_to_string(&csv_path).unwrap());
    assert_eq!(rows.len(), 401);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[400][0], 1.0);
}

#[test]
fn reruns_are_byte_identical(){
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = |p: &Path| {
        vec![
            "--method".into(), "mc".into(), "--a".into(), "-1/2".into(),
            "--b".into(), "-1/2".into(), "--N".into(), "2".into(),
            "--samples".into(), "5000".into(), "--seed".into(), "99".into(),
            "--grid-points".into(), "64".into(),
            "--output".into(), p.to_str().unwrap().to_string(),
        ]
    };
    let out1 = Command::new(env!("CARGO_BIN_EXE_jacobi-gap"))
        .args(args(&p1))
        .output()
        .unwrap();
    assert!(out1.status.success());
    let out2 = Command::new(env!("CARGO_BIN_EXE_jacobi-gap"))
        .args(args(&p2))
        .output()
        .unwrap();
    assert!(out2.status.success());
    let b1 = std::fs::read(&p1).unwrap();
    let b2 = std::fs::read(&p2).unwrap();
    assert!(!b1.is_empty() && b1 == b2);
}

#[test]
fn argument_errors_exit_2() {
    // unknown method
    assert_eq!(
        run(&["--method", "nope", "--a", "0", "--b", "0", "--N", "1"]).status.code(),
        Some(2)
    );
    // unparseable rational
    assert_eq!(
        run(&["--method", "series", "--a", "x", "--b", "0", "--N", "1"]).status.code(),
        Some(2)
    );
    // a <= -1 fails the ensemble domain check
    assert_eq!(
        run(&["--method", "series", "--a", "-3/2", "--b", "0", "--N", "1"]).status.code(),
        Some(2)
    );
    // N > 5 has no default degree
    assert_eq!(
        run(&["--method", "series", "--a", "0", "--b", "0", "--N", "9"]).status.code(),
        Some(2)
    );
}

#[test]
fn twelve_significant_digits_in_csv() {
    let out = run(&[
        "--method", "series", "--a", "-1/2", "--b", "-1/2", "--N", "1",
        "--degree", "30", "--grid-points", "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            let mantissa = field.split('e').next().unwrap();
            let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
            assert!(digits >= 12, "field {field} has too few digits");
        }
    }
}
