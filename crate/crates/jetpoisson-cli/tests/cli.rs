use jetpoisson::report::Report;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetpoisson")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Report {
    Report::from_json(&String::from_utf8_lossy(&out.stdout)).expect("stdout is a JSON report")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("jetpoisson-cli-{}-{}", std::process::id(), name))
}

#[test]
fn poisson_table_for_d2() {
    let out = run(&["verify", "poisson", "--d", "2", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.records.iter().filter(|r| r.check == "bracket_table").count(), 10);
    assert!(r.all_pass());
}

#[test]
fn quantum_r2_with_numeric_parameter() {
    let out = run(&["verify", "quantum", "--set", "R2", "--C", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out).records.iter().all(|r| r.params.get("C").map(String::as_str) == Some("0")));
}

#[test]
fn group_suite_passes() {
    assert_eq!(run(&["verify", "group", "--n", "6"]).status.code(), Some(0));
}

#[test]
fn failing_check_exits_one() {
    let out = run(&["verify", "bialgebra"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let bad: Vec<_> = r.records.iter().filter(|r| !r.passed()).map(|r| r.check.as_str()).collect();
    assert_eq!(bad, ["witt_a_sequence"]);
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(run(&["verify", "group", "--n", "x"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "quantum", "--set", "R2", "--C", "foo"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "phi", "--phi", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "phi", "--phi", "table:/nonexistent/table"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "quantum", "--set", "R3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn out_file_and_text_format() {
    let path = temp_path("report.txt");
    let out = run(&["verify", "group", "--n", "4", "--format", "text", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS associativity")));
}

#[test]
fn phi_tables_from_file() {
    let good = temp_path("good.txt");
    std::fs::write(&good, "# phi for d = 2\n3 1 1\n1 3 -1\n").unwrap();
    let bad = temp_path("bad.txt");
    std::fs::write(&bad, "1 2 1\n1 3 1\n").unwrap();
    let good_arg = format!("table:{}", good.display());
    let bad_arg = format!("table:{}", bad.display());
    let poisson = run(&["verify", "poisson", "--phi", &good_arg, "--n", "5"]);
    let phi = run(&["verify", "phi", "--phi", &bad_arg, "--degree", "6"]);
    std::fs::remove_file(&good).unwrap();
    std::fs::remove_file(&bad).unwrap();
    assert_eq!(poisson.status.code(), Some(0));
    assert_eq!(phi.status.code(), Some(1));
    let r = report(&phi);
    let failed = r.records.iter().find(|r| !r.passed()).unwrap();
    assert_eq!((failed.check.as_str(), failed.witness.indices.as_slice()), ("phi_equation", &[1, 2, 3][..]));
}
