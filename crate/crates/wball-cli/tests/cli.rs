//! End-to-end tests driving the compiled binary.
//!
//! The exit-code contract (0 success, 2 bad input, 3 likely unbounded,
//! 4 certification failed) and the report format are stable interfaces,
//! so they are pinned here rather than in unit tests.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wball"))
}

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../instances")
        .join(name)
}

fn scratch_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wball-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn distance_between_diracs_prints_the_gap() {
    let out = run(&["distance", "1@0", "1@3", "--p", "1"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("W_1 = 3"), "{text}");
    assert!(text.contains("0 -> 0  mass 1"), "{text}");
}

#[test]
fn distance_of_a_measure_to_itself_is_zero() {
    let out = run(&["distance", "0.5@0,0;0.5@1,2", "0.5@0,0;0.5@1,2"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("W_2 = 0"));
}

#[test]
fn distance_reads_measure_files_and_metric_flags() {
    let a = scratch_path("a.toml");
    let b = scratch_path("b.toml");
    std::fs::write(
        &a,
        "version = 1\ndimension = 2\n[measure]\natoms = [[0.0, 0.0]]\nweights = [1.0]\n",
    )
    .unwrap();
    std::fs::write(
        &b,
        "version = 1\ndimension = 2\n[measure]\natoms = [[1.0, 1.0]]\nweights = [1.0]\n",
    )
    .unwrap();
    let out = run(&[
        "distance",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--p",
        "1",
        "--metric",
        "q-norm",
        "--q",
        "1",
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("W_1 = 2"), "{}", stdout_of(&out));
}

#[test]
fn solve_certifies_the_linear_instance() {
    let report = scratch_path("solve_linear.json");
    let out = run(&[
        "solve",
        instance("01_linear_p1.toml").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let value = json["outputs"]["solve"]["primal_value"].as_f64().unwrap();
    assert!((value - 1.0).abs() <= 1e-6, "value {value}");
    assert_eq!(json["outputs"]["certification"]["certified"], true);
    assert_eq!(json["instance"]["solver"]["restarts"], 64);
    assert_eq!(json["instance"]["solver"]["grid"], 65);
    assert_eq!(json["seed"], 0);
}

#[test]
fn solve_reports_are_deterministic_for_a_fixed_seed() {
    let first = scratch_path("det_a.json");
    let second = scratch_path("det_b.json");
    for path in [&first, &second] {
        let out = run(&[
            "solve",
            instance("10_two_atom_gauss.toml").to_str().unwrap(),
            "--seed",
            "7",
            "--grid-check",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    }
    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(a["outputs"], b["outputs"]);
    assert_eq!(a["instance"], b["instance"]);
}

#[test]
fn solve_refuses_divergent_objectives_unless_forced() {
    let path = instance("14_diverge_show.toml");
    let refused = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(refused.status.code(), Some(3), "{}", stdout_of(&refused));
    assert!(stdout_of(&refused).contains("likely unbounded"));
    let forced = run(&["solve", path.to_str().unwrap(), "--force"]);
    assert_eq!(forced.status.code(), Some(0), "{}", stdout_of(&forced));
    assert!(stdout_of(&forced).contains("certified = yes"));
}

#[test]
fn solve_exits_four_when_the_gap_tolerance_is_unmet() {
    let out = run(&[
        "solve",
        instance("15_quartic_capped.toml").to_str().unwrap(),
        "--gap-tol",
        "1e-15",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("certified = no"));
}

#[test]
fn certify_exit_code_tracks_the_base_exponent_verdict() {
    let bounded = run(&["certify", instance("01_linear_p1.toml").to_str().unwrap()]);
    assert_eq!(bounded.status.code(), Some(0));
    assert!(stdout_of(&bounded).contains("bounded-evidence"));
    let divergent = run(&["certify", instance("14_diverge_show.toml").to_str().unwrap()]);
    assert_eq!(divergent.status.code(), Some(3));
    assert!(stdout_of(&divergent).contains("divergence-evidence"));
}

#[test]
fn diverge_prints_the_requested_number_of_witness_rows() {
    let report = scratch_path("diverge.json");
    let out = run(&[
        "diverge",
        instance("14_diverge_show.toml").to_str().unwrap(),
        "--K",
        "5",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 5, "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let rows = json["outputs"]["witnesses"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let radius = json["instance"]["radius"].as_f64().unwrap();
    for row in rows {
        assert!(row["verified_distance"].as_f64().unwrap() <= radius + 1e-9);
    }
}

#[test]
fn bad_problem_files_exit_two() {
    let bad = scratch_path("bad.toml");
    std::fs::write(&bad, "version = 1\nradius = 1.0\nbanana = true\n").unwrap();
    let out = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let missing = run(&["solve", "/nonexistent/nowhere.toml"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bad_inline_measures_exit_two() {
    let out = run(&["distance", "0.4@0", "1@1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_dash_sends_json_to_stdout_and_summary_to_stderr() {
    let out = run(&[
        "solve",
        instance("03_quad_concave.toml").to_str().unwrap(),
        "--report",
        "-",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(json["command"], "solve");
    assert!(String::from_utf8_lossy(&out.stderr).contains("certified = yes"));
}
