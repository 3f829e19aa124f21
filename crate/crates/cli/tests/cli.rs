//! End-to-end runs of the `oneshot-rsp` binary: reports, formats and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oneshot-rsp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn report(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("JSON report");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["config"].is_object());
    v["report"].clone()
}

fn quantity(report: &Value, name: &str) -> f64 {
    report["quantities"]
        .as_array()
        .unwrap()
        .iter()
        .find(|q| q["quantity"] == name)
        .unwrap_or_else(|| panic!("no quantity {name}"))["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn entropy_of_orthogonal_qubits() {
    let r = report(&run(&[
        "entropy",
        "--ensemble",
        &data("orthogonal_qubits.json"),
        "--epsilon",
        "0.1",
    ]));
    assert!((quantity(&r, "holevo") - 1.0).abs() <= 1e-9);
    assert!((quantity(&r, "i_max") - 1.0).abs() <= 1e-6);
}

#[test]
fn csv_has_the_fixed_header() {
    for args in [
        vec!["entropy", "--ensemble", &data("orthogonal_qubits.json")],
        vec!["gap"],
        vec!["locc", "--n-bits", "3", "--p", "0.5"],
    ] {
        let mut args = args.clone();
        args.extend(["--format", "csv"]);
        let out = run(&args);
        assert_eq!(code(&out), 0);
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.lines().next(), Some("quantity,value,epsilon"), "{args:?}");
    }
}

#[test]
fn parse_errors_exit_with_two() {
    let out = run(&["entropy", "--ensemble", &data("empty.json")]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("states: expected ≥ 1"));

    let out = run(&["entropy", "--ensemble", &data("non_hermitian.json")]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 0, col 1"));

    assert_eq!(code(&run(&["entropy", "--ensemble", &data("missing.json")])), 2);
    assert_eq!(code(&run(&["entropy"])), 2);
    assert_eq!(code(&run(&["entropy", "--no-such-flag"])), 2);
}

#[test]
fn invalid_parameters_exit_with_two() {
    let qubits = data("orthogonal_qubits.json");
    assert_eq!(code(&run(&["entropy", "--ensemble", &qubits, "--epsilon", "1.5"])), 2);
    assert_eq!(
        code(&run(&[
            "bounds",
            "--ensemble",
            &qubits,
            "--epsilon",
            "0.5",
            "--delta",
            "0.9"
        ])),
        2
    );
    assert_eq!(code(&run(&["net", "--ensemble", &qubits, "--nu", "-0.1"])), 2);
    assert_eq!(code(&run(&["selftest", "--tol", "0"])), 2);
}

#[test]
fn bounds_exit_codes() {
    let qubits = data("orthogonal_qubits.json");
    let r = report(&run(&[
        "bounds",
        "--ensemble",
        &qubits,
        "--epsilon",
        "0.1",
        "--delta",
        "0.4",
    ]));
    assert_eq!(r["average_case"]["ordered"], true);
    assert_eq!(r["worst_case"]["ordered"], true);
    assert_eq!(code(&run(&["bounds", "--ensemble", &data("single_state.json")])), 0);
    let corrupt = run(&[
        "bounds",
        "--ensemble",
        &qubits,
        "--epsilon",
        "0.1",
        "--delta",
        "0.4",
        "--corrupt-upper",
    ]);
    assert_eq!(code(&corrupt), 1);
}

#[test]
fn locc_baseline_is_tight() {
    let r = report(&run(&["locc", "--n-bits", "4", "--p", "0.25"]));
    assert_eq!(r["check"]["alice_bits"], 2);
    assert!(r["check"]["slack"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(r["holds"], true);
}

#[test]
fn gap_values() {
    let r = report(&run(&["gap", "--epsilon", "0.5", "--n-bits", "10"]));
    assert_eq!(r["worst_lb"], 10.0);
    assert_eq!(r["avg_cost_skewed"], 0);
    assert!((r["geometric_bound"].as_f64().unwrap() - (3f64.log2() + 2.0)).abs() <= 1e-12);
}

#[test]
fn net_of_orthogonal_triple() {
    let r = report(&run(&[
        "net",
        "--ensemble",
        &data("orthogonal_triple.json"),
        "--nu",
        "0.5",
    ]));
    assert_eq!(r["net_indices"].as_array().unwrap().len(), 3);
}

#[test]
fn reports_are_reproducible() {
    let qubits = data("mixed_qutrits.json");
    let args = [
        "jrs",
        "--ensemble",
        &qubits,
        "--epsilon",
        "0.3",
        "--trials",
        "200",
        "--seed",
        "9",
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0, "stderr: {}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_file_matches_standard_output() {
    let path = std::env::temp_dir().join(format!("oneshot-rsp-gap-{}.json", std::process::id()));
    let out = run(&["gap", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let direct = run(&["gap"]);
    let strip = |bytes: &[u8]| {
        let mut v: Value = serde_json::from_slice(bytes).unwrap();
        v["config"].as_object_mut().unwrap().remove("out");
        v
    };
    assert_eq!(strip(&written), strip(&direct.stdout));
}

#[test]
fn selftest_names_failing_criteria() {
    let ok = run(&["selftest", "--criteria", "5"]);
    assert_eq!(code(&ok), 0);
    let tight = run(&["selftest", "--criteria", "5", "--tol", "1e-12"]);
    assert_eq!(code(&tight), 1);
    assert!(String::from_utf8_lossy(&tight.stderr).contains("criterion  5 FAIL"));
}
