use std::fs;
use std::process::Command;

use rkq_cli::csv::{read_trajectory_csv, HEADER};
use rkq_cli::summary::{parse_summary, KEYS};
use rkq_cli::{run_cli, EXIT_OK, EXIT_OUTPUT, EXIT_UNKNOWN_PROBLEM, EXIT_USAGE};

fn rkq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rkq"))
}

#[test]
fn empty_interval_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run_cli(["rkq", "--problem", "pendulum", "--t-end", "0", "--out", out]);
    assert_eq!(code, EXIT_OK);
    for name in ["rkq.csv", "unquenched.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(HEADER));
        assert_eq!(lines.count(), 1);
    }
    let rows = read_trajectory_csv(&dir.path().join("rkq.csv")).unwrap();
    assert_eq!(rows[0].i, 0);
    assert!((rows[0].h34 - 0.8).abs() < 1e-15);
    assert_eq!(rows[0].gerr_q, 0.0);
}

#[test]
fn unknown_problem_fails_with_message() {
    let output = rkq().args(["--problem", "nosuch"]).output().unwrap();
    assert_eq!(output.status.code(), Some(EXIT_UNKNOWN_PROBLEM));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown problem"), "{stderr}");
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(run_cli(["rkq", "--mode", "sideways"]), EXIT_USAGE);
    assert_eq!(run_cli(["rkq", "--subsample", "0"]), EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run_cli(["rkq", "--tol-abs", "0", "--out", out]), EXIT_USAGE);
}

#[test]
fn integration_abort_has_its_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run_cli(["rkq", "--t-end", "100", "--max-steps", "5", "--out", out]);
    assert_eq!(code, rkq_cli::EXIT_INTEGRATION);
}

#[test]
fn unwritable_output_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let code = run_cli(["rkq", "--t-end", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OUTPUT);
}

#[test]
fn summary_and_subsampling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run_cli([
        "rkq",
        "--problem",
        "harmonic",
        "--mode",
        "rkq",
        "--t-end",
        "10",
        "--subsample",
        "7",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(!dir.path().join("unquenched.csv").exists());
    let summary = parse_summary(&fs::read_to_string(dir.path().join("rkq_summary.txt")).unwrap());
    let keys: Vec<&str> = summary.iter().map(|(k, _)| k.as_str()).collect();
    assert_eq!(keys, KEYS);
    let nodes: usize = summary[0].1.parse().unwrap();
    let rows = read_trajectory_csv(&dir.path().join("rkq.csv")).unwrap();
    let expected = (nodes - 1) / 7 + 1 + usize::from(!(nodes - 1).is_multiple_of(7));
    assert_eq!(rows.len(), expected);
    assert_eq!(rows.last().unwrap().i, nodes - 1);
    assert_eq!(rows.last().unwrap().t, 10.0);
    let max_gerr_q: f64 = summary[2].1.parse().unwrap();
    assert!(max_gerr_q <= 1e-6);
}

#[test]
fn figures_do_not_change_numbers() {
    let plain = tempfile::tempdir().unwrap();
    let with_figs = tempfile::tempdir().unwrap();
    let base = ["rkq", "--t-end", "60", "--mode", "both"];
    let a: Vec<&str> = base
        .iter()
        .copied()
        .chain(["--out", plain.path().to_str().unwrap()])
        .collect();
    let b: Vec<&str> = base
        .iter()
        .copied()
        .chain(["--out", with_figs.path().to_str().unwrap(), "--figures"])
        .collect();
    assert_eq!(run_cli(a), EXIT_OK);
    assert_eq!(run_cli(b), EXIT_OK);
    for name in ["rkq.csv", "unquenched.csv"] {
        assert_eq!(
            fs::read(plain.path().join(name)).unwrap(),
            fs::read(with_figs.path().join(name)).unwrap()
        );
    }
    for fig in [
        "fig1_solution.svg",
        "fig2_global_error.svg",
        "fig3_trajectory_error.svg",
        "fig4_reference_error.svg",
    ] {
        let svg = fs::read_to_string(with_figs.path().join(fig)).unwrap();
        assert!(svg.contains(r#"viewBox="0 0 800 600""#), "{fig}");
        assert!(!plain.path().join(fig).exists());
    }
}

#[test]
fn relative_mode_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run_cli([
        "rkq",
        "--mode",
        "rkq",
        "--t-end",
        "20",
        "--tol-abs",
        "1e-8",
        "--tol-rel",
        "1e-6",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK);
}
