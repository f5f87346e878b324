//! Black-box behavior of the `horolab` binary: exit codes, config layering,
//! cache round-trips, and output hygiene.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_horolab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("horolab-test-{}-{name}", std::process::id()));
    path
}

#[test]
fn exit_codes_follow_the_contract() {
    // domain error: degenerate scale
    let out = run(&["counterexample", "--a", "1", "--word-length", "1"]);
    assert_eq!(out.status.code(), Some(1));

    // inconclusive: trace inequality fails
    let out = run(&[
        "counterexample",
        "--a",
        "10",
        "--word-length",
        "1",
        "--samples",
        "10",
        "--t-max",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // domain error: no non-identity elements
    let out = run(&["constants", "--word-length", "0"]);
    assert_eq!(out.status.code(), Some(1));

    // resource cap
    let out = run(&["constants", "--word-length", "4", "--max-elements", "50"]);
    assert_eq!(out.status.code(), Some(3));

    // I/O error: unwritable output path
    let out = run(&[
        "scan",
        "--samples",
        "3",
        "--t-max",
        "1",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));

    // usage error
    let out = run(&["not-a-command"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_applies_and_flags_win() {
    let config_path = tmp("config.toml");
    std::fs::write(&config_path, "word_length = 1\nseed = 7\n").unwrap();

    let from_file = run(&["--config", config_path.to_str().unwrap(), "constants"]);
    assert!(from_file.status.success());
    let text = String::from_utf8(from_file.stdout).unwrap();
    assert!(text.contains("\"word_length\": 1"), "{text}");
    assert!(text.contains("\"seed\": 7"));

    let flag_wins = run(&[
        "--config",
        config_path.to_str().unwrap(),
        "--seed",
        "9",
        "constants",
        "--word-length",
        "2",
    ]);
    assert!(flag_wins.status.success());
    let text = String::from_utf8(flag_wins.stdout).unwrap();
    assert!(text.contains("\"word_length\": 2"), "{text}");
    assert!(text.contains("\"seed\": 9"));

    let bad_config = tmp("bad-config.toml");
    std::fs::write(&bad_config, "word_lenth = 1\n").unwrap();
    let out = run(&["--config", bad_config.to_str().unwrap(), "constants"]);
    assert_eq!(out.status.code(), Some(1));

    std::fs::remove_file(&config_path).ok();
    std::fs::remove_file(&bad_config).ok();
}

#[test]
fn scan_with_zero_samples_emits_header_only() {
    let out = run(&[
        "scan",
        "--samples",
        "0",
        "--t-max",
        "5",
        "--word-length",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("t,lo,hi,lo_certified\n"));
    let data_rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('t') && !l.is_empty())
        .collect();
    assert!(data_rows.is_empty(), "unexpected rows {data_rows:?}");
}

#[test]
fn sweep_with_empty_delta_grid_is_header_only() {
    let out = run(&[
        "sweep",
        "--trials",
        "2",
        "--deltas",
        "",
        "--t-max",
        "5",
        "--scan-samples",
        "4",
        "--word-length",
        "2",
        "--displacement",
        "4.0",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("delta,separated,fraction_separated\n"));
    assert!(!text.lines().any(|l| l.starts_with(char::is_numeric)));
}

#[test]
fn cached_ball_reproduces_in_process_results() {
    let ball_path = tmp("ball.txt");
    let out = run(&[
        "cache-ball",
        "--word-length",
        "2",
        "--out",
        ball_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let direct = run(&["constants", "--word-length", "2"]);
    let cached = run(&["constants", "--ball", ball_path.to_str().unwrap()]);
    assert!(direct.status.success() && cached.status.success());
    assert_eq!(direct.stdout, cached.stdout);

    std::fs::remove_file(&ball_path).ok();
}

#[test]
fn plot_is_valid_svg_and_deterministic() {
    let a = run(&["plot", "--t-max", "4", "--samples", "64"]);
    let b = run(&["plot", "--t-max", "4", "--samples", "64"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.contains("schema_version: 1"));
    assert!(text.contains("<svg"));
    assert!(text.trim_end().ends_with("</svg>"));

    // An empty trace set still renders a valid document.
    let empty = run(&["plot", "--orbits", "0", "--samples", "16"]);
    assert!(empty.status.success());
    let text = String::from_utf8(empty.stdout).unwrap();
    assert!(text.contains("</svg>"));
}

#[test]
fn outputs_carry_schema_versions() {
    let json = run(&["constants", "--word-length", "1"]);
    assert!(String::from_utf8(json.stdout)
        .unwrap()
        .contains("\"schema_version\": 1"));

    let csv = run(&[
        "scan",
        "--samples",
        "2",
        "--t-max",
        "1",
        "--word-length",
        "1",
    ]);
    assert!(String::from_utf8(csv.stdout)
        .unwrap()
        .contains("# schema_version: 1"));

    let cache = run(&["cache-ball", "--word-length", "1"]);
    assert!(String::from_utf8(cache.stdout)
        .unwrap()
        .contains("# schema_version: 1"));
}
