//! CLI acceptance and contract tests: determinism of emitted artifacts, exit
//! codes with field-precise messages, CSV schemas and the config snapshot
//! round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sfg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

fn summary_json(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&read(&dir.join("summary.json"))).expect("valid summary JSON")
}

#[test]
fn criterion_9_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let out_s = out.to_str().unwrap();

    let first = sfg(&["gdd-scan", "--out", out_s, "--seed", "7"]);
    assert!(first.status.success(), "{first:?}");
    let csv_a = read(&out.join("gdd_scan.csv"));
    let json_a = read(&out.join("summary.json"));

    let second = sfg(&["gdd-scan", "--out", out_s, "--seed", "7"]);
    assert!(second.status.success(), "{second:?}");
    let csv_b = read(&out.join("gdd_scan.csv"));
    let json_b = read(&out.join("summary.json"));

    let passed = csv_a == csv_b && json_a == json_b;
    println!(
        "criterion 9 (byte-identical artifacts on identical runs): {}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "artifacts differ between identical runs");

    // The same run into a different directory produces the same CSV bytes.
    let other = tmp.path().join("other");
    let third = sfg(&["gdd-scan", "--out", other.to_str().unwrap(), "--seed", "7"]);
    assert!(third.status.success());
    assert_eq!(csv_a, read(&other.join("gdd_scan.csv")));
}

#[test]
fn malformed_config_exits_two_and_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "[parametric]\nshaper_transmission = 1.5\n").unwrap();
    let out = sfg(&[
        "gdd-scan",
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("shaper_transmission"),
        "stderr does not name the field: {stderr}"
    );
}

#[test]
fn unknown_config_key_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("typo.toml");
    fs::write(&config, "[grid]\nbandwith = \"113 THz\"\n").unwrap();
    let out = sfg(&["gdd-scan", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn default_gdd_scan_schema_and_range() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let run = sfg(&["gdd-scan", "--out", out_dir.to_str().unwrap()]);
    assert!(run.status.success());

    let csv = String::from_utf8(read(&out_dir.join("gdd_scan.csv"))).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "parameter,demod_signal,rf_power,stimulated_term,spontaneous_term"
    );
    assert_eq!(lines.len(), 402, "header plus 401 data rows");
    assert!(!csv.contains('\r'));

    // Default range is ±10× the predicted coherence width.
    let first: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    let last: f64 = lines[401].split(',').next().unwrap().parse().unwrap();
    let expected = 10.0 * 2.4928333164992612e-29;
    assert!((first + expected).abs() < 1e-12 * expected);
    assert!((last - expected).abs() < 1e-12 * expected);

    let summary = summary_json(&out_dir);
    assert_eq!(summary["experiment"], "gdd-scan");
    assert_eq!(summary["derived"]["mode_count"], 113);
    assert!(summary["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn two_point_scan_emits_three_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("two.toml");
    fs::write(&config, "[scan]\npoints = 2\n").unwrap();
    let out_dir = tmp.path().join("out");
    let run = sfg(&[
        "gdd-scan",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let csv = String::from_utf8(read(&out_dir.join("gdd_scan.csv"))).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn separability_defaults_match_headline_product() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let run = sfg(&["separability", "--out", out_dir.to_str().unwrap()]);
    assert!(run.status.success());
    let summary = summary_json(&out_dir);
    let product = summary["results"]["product"].as_f64().unwrap();
    assert!(
        (1.7e-13..=1.9e-13).contains(&product),
        "product {product} out of range"
    );
    assert!(summary["results"]["violation_factor"].as_f64().unwrap() > 1e12);
}

#[test]
fn config_snapshot_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first_dir = tmp.path().join("first");
    let run = sfg(&["gdd-scan", "--out", first_dir.to_str().unwrap()]);
    assert!(run.status.success());
    let csv_first = read(&first_dir.join("gdd_scan.csv"));

    // The emitted summary itself is a valid config: its embedded snapshot
    // reproduces the run bit for bit.
    let second_dir = tmp.path().join("second");
    let rerun = sfg(&[
        "gdd-scan",
        "--config",
        first_dir.join("summary.json").to_str().unwrap(),
        "--out",
        second_dir.to_str().unwrap(),
    ]);
    assert!(rerun.status.success(), "{rerun:?}");
    assert_eq!(csv_first, read(&second_dir.join("gdd_scan.csv")));
}

#[test]
fn remaining_subcommands_produce_artifacts() {
    let tmp = tempfile::tempdir().unwrap();

    let loss_dir = tmp.path().join("loss");
    assert!(sfg(&["loss-scan", "--out", loss_dir.to_str().unwrap()])
        .status
        .success());
    assert!(loss_dir.join("loss_scan.csv").exists());

    let residue_dir = tmp.path().join("residue");
    assert!(sfg(&["residue-scan", "--out", residue_dir.to_str().unwrap()])
        .status
        .success());
    assert!(residue_dir.join("residue_scan.csv").exists());

    let su11_dir = tmp.path().join("su11");
    assert!(sfg(&["su11-spectrum", "--out", su11_dir.to_str().unwrap()])
        .status
        .success());
    let su11 = String::from_utf8(read(&su11_dir.join("su11_spectrum.csv"))).unwrap();
    assert_eq!(su11.lines().next().unwrap(), "offset_hz,intensity");
    assert_eq!(su11.lines().count(), 114);

    let oracle_dir = tmp.path().join("oracle");
    assert!(sfg(&["oracle-validate", "--out", oracle_dir.to_str().unwrap()])
        .status
        .success());
    let oracle = summary_json(&oracle_dir);
    assert_eq!(oracle["results"]["passed"], true);

    let mf_dir = tmp.path().join("mf");
    assert!(sfg(&["matched-filter", "--out", mf_dir.to_str().unwrap()])
        .status
        .success());
    let mf = summary_json(&mf_dir);
    assert_eq!(mf["results"]["correlation_peak"].as_f64().unwrap(), 100.0);
    assert_eq!(mf["results"]["snr"].as_f64().unwrap(), 100.0);
    let mc = mf["results"]["mc_background_power"].as_f64().unwrap();
    let expected = mf["results"]["expected_background_power"].as_f64().unwrap();
    assert!((mc / expected - 1.0).abs() < 0.05);
}

#[test]
fn shipped_example_config_matches_defaults() {
    let example = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/example.toml");
    let tmp = tempfile::tempdir().unwrap();

    let from_example = tmp.path().join("example");
    let run = sfg(&[
        "gdd-scan",
        "--config",
        example.to_str().unwrap(),
        "--out",
        from_example.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{run:?}");

    let from_defaults = tmp.path().join("defaults");
    assert!(sfg(&["gdd-scan", "--out", from_defaults.to_str().unwrap()])
        .status
        .success());
    assert_eq!(
        read(&from_example.join("gdd_scan.csv")),
        read(&from_defaults.join("gdd_scan.csv")),
        "example config should reproduce the built-in defaults"
    );
}

#[test]
fn high_gain_warning_lands_in_summary_with_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("hot.toml");
    fs::write(&config, "[parametric]\ncoupling = 3e-4\n").unwrap();
    let out_dir = tmp.path().join("out");
    let run = sfg(&[
        "gdd-scan",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let summary = summary_json(&out_dir);
    let warnings = summary["warnings"].as_array().unwrap();
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].as_str().unwrap().contains("gain"));
}
