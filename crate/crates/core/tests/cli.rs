use std::path::Path;
use std::process::{Command, Output};

use fogbank::report::{parse_csv, parse_solution_json, CSV_HEADER};

fn fogbank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fogbank"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn default_config() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/default.json")
        .to_string_lossy()
        .into_owned()
}

#[test]
fn solve_writes_json_with_vehicle_share() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.json");
    let o = fogbank(&[
        "solve", "--variant", "high", "--strategy", "distributed", "--workload", "3500", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sol = parse_solution_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let on_vehicles: f64 = sol
        .allocation
        .iter()
        .filter(|((_, s), _)| s.as_str().starts_with("vf"))
        .map(|(_, m)| m)
        .sum();
    assert!(on_vehicles > 0.0);
    assert_eq!(sol.stats.runtime_ms, 0.0);
}

#[test]
fn solve_is_byte_identical_across_runs() {
    let args = ["solve", "--variant", "low", "--strategy", "single", "--tasks", "8", "--seed", "3"];
    let (a, b) = (fogbank(&args), fogbank(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sweep_prints_header_and_eighty_rows() {
    let o = fogbank(&["sweep", "--config", &default_config(), "--workers", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 81);
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(parse_csv(&text).unwrap().len(), 80);
}

#[test]
fn validate_accepts_own_output_and_rejects_other_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let sol = sol.to_str().unwrap();
    let scenario = ["--variant", "cf", "--strategy", "distributed", "--workload", "2000", "--tasks", "6"];
    let mut args = vec!["solve", "--out", sol];
    args.extend(scenario);
    assert!(fogbank(&args).status.success());

    let mut args = vec!["validate", "--solution", sol];
    args.extend(scenario);
    let o = fogbank(&args);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("\"ok\": true"));

    let o = fogbank(&[
        "validate", "--solution", sol, "--variant", "cf", "--strategy", "distributed",
        "--workload", "2500", "--tasks", "6",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"ok\": false"));
}

#[test]
fn infeasible_solve_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.json");
    std::fs::write(&cfg, r#"{"servers":{"cc":{"count":1}}}"#).unwrap();
    let o = fogbank(&[
        "solve", "--config", cfg.to_str().unwrap(), "--variant", "cc", "--strategy", "single",
        "--workload", "5000",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"status\": \"infeasible\""));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["solve", "--variant", "mega", "--strategy", "single"],
        vec!["solve", "--variant", "cc"],
        vec!["sweep", "--bogus"],
        vec!["frobnicate"],
        vec!["oracle-check", "--max-tasks", "9"],
        vec!["sweep", "--config", "/nonexistent/config.json"],
    ] {
        let o = fogbank(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"servers":{"cc":{"capacity":1}}}"#).unwrap();
    let o = fogbank(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity"));
}

#[test]
fn help_for_every_subcommand() {
    for sub in ["solve", "sweep", "oracle-check", "validate", "export-lp"] {
        let o = fogbank(&[sub, "--help"]);
        assert!(o.status.success(), "{sub}");
        assert!(stdout(&o).contains("Usage"));
    }
}

#[test]
fn oracle_check_small_run() {
    let o = fogbank(&["oracle-check", "--trials", "10", "--seed", "7", "--max-tasks", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("failures: 0"));
}

#[test]
fn export_lp_has_all_sections() {
    let o = fogbank(&[
        "export-lp", "--variant", "cc", "--strategy", "single", "--workload", "500", "--tasks", "1",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    for section in ["Minimize", "Subject To", "Bounds", "Binaries", "End"] {
        assert!(text.contains(section), "{section}");
    }
    assert!(text.contains(" a_cc1\n"));
}
