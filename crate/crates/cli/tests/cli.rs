//! End-to-end tests of the `wsn-sim` binary: exit codes, file layout,
//! config precedence, and sweep aggregation.

use std::process::{Command, Output};

fn wsn_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsn-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn run_happy_path_writes_csv_and_summary_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let result = wsn_sim(&[
        "run",
        "--scenario",
        "static",
        "--dim",
        "200",
        "--seed",
        "1",
        "--out",
        out,
    ]);
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("static dim 200 seed 1"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("static_200_1.csv")).unwrap();
    assert!(csv.starts_with("round,alive,dead,ch_count"));
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let result = wsn_sim(&["run", "--scenario", "ms9", "--dim", "200", "--seed", "1"]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("ms9"), "{stderr}");
}

#[test]
fn non_positive_dim_is_a_usage_error() {
    let result = wsn_sim(&["run", "--scenario", "ms1", "--dim", "0", "--seed", "1"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"max_rounds": 40, "num_nodes": 30, "rng_seed": 999}"#,
    )
    .unwrap();
    let out = dir.path().to_str().unwrap();
    let result = wsn_sim(&[
        "run",
        "--scenario",
        "ms2",
        "--dim",
        "250",
        "--seed",
        "3",
        "--nodes",
        "20",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out,
    ]);
    assert!(result.status.success());
    // Config set the round cap; the explicit --nodes flag and --seed win
    // over the config's values.
    let csv = std::fs::read_to_string(dir.path().join("ms2_250_3.csv")).unwrap();
    let rows = csv.lines().count() - 1;
    assert_eq!(rows, 40);
    let first_row = csv.lines().nth(1).unwrap();
    let alive: u32 = first_row.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(alive, 20);
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"weights": {"a1": 0.9}}"#).unwrap();
    let result = wsn_sim(&[
        "run",
        "--scenario",
        "ms1",
        "--dim",
        "200",
        "--seed",
        "1",
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("sum to 1"), "{stderr}");
}

#[test]
fn sweep_produces_matrix_of_csvs_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let result = wsn_sim(&[
        "sweep",
        "--dims",
        "150",
        "--scenarios",
        "ms2,pms2",
        "--seeds",
        "3",
        "--out",
        out,
    ]);
    assert!(result.status.success());
    let entries: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let csv_count = entries.iter().filter(|n| n.ends_with(".csv")).count();
    assert_eq!(csv_count, 6);
    assert!(entries.iter().any(|n| n == "summary.json"));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    let cells: usize = summary
        .as_object()
        .unwrap()
        .values()
        .map(|dims| dims.as_object().unwrap().len())
        .sum();
    assert_eq!(cells, 2);
    assert_eq!(summary["ms2"]["150"]["runs"], 3);
    assert!(summary["pms2"]["150"]["quarter_dead_round"].is_object());
}

#[test]
fn sweep_rejects_bad_dimension_lists() {
    let result = wsn_sim(&["sweep", "--dims", "200,abc", "--seeds", "1"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let result = wsn_sim(&[
            "run",
            "--scenario",
            "ms3",
            "--dim",
            "350",
            "--seed",
            "11",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    let a = std::fs::read(dir_a.path().join("ms3_350_11.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("ms3_350_11.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn check_subcommand_passes() {
    let result = wsn_sim(&["check"]);
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    for name in [
        "crossover-continuity",
        "energy-conservation",
        "determinism",
        "monotonicity",
    ] {
        assert!(stdout.contains(&format!("PASS {name}")), "{stdout}");
    }
}
