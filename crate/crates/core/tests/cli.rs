use std::path::Path;
use std::process::{Command, Output};

use qpm_core::config::parse_config;
use qpm_core::oracle::{exhaustive_hypothesis_check, HypothesisOptions, HypothesisReport};
use qpm_core::solver::{parse_trace_csv, replay_trace, DEFAULT_TOL_FEAS};
use serde_json::Value;
use tempfile::TempDir;

const EXAMPLE_V1: &str = r#"{"scenario":"paper-example","variant":"V1","phi":0.5,"eta":0.6666666666666666,"x0":10}"#;

fn qpm(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qpm")).arg("--config").arg(&path).args(args).output().unwrap()
}

fn report(dir: &Path, command: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{command}.json"))).unwrap()).unwrap()
}

#[test]
fn solve_writes_replayable_trace() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = qpm(tmp.path(), EXAMPLE_V1, &["--command", "solve", "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "solve: pass");

    let rep = report(&out, "solve");
    let defaults = &rep["header"]["defaults"];
    for key in ["eps_conv", "max_iter", "tol_feas", "grid_step", "axiom_tol", "strict_margin", "limsup", "cauchy"] {
        assert!(!defaults[key].is_null(), "missing default {key}");
    }
    assert_eq!(rep["runs"][0]["iterations"], 29);
    assert_eq!(rep["runs"][0]["decay"]["rate"], 0.5);

    let csv = std::fs::read_to_string(out.join("trace-V1-start-x10.csv")).unwrap();
    let cfg = parse_config(EXAMPLE_V1).unwrap();
    let inst = cfg.instance(None).unwrap();
    let parsed = parse_trace_csv(&csv, &inst.space).unwrap();
    assert_eq!(parsed.outcome, "converged");
    assert_eq!(parsed.steps.len(), 30);
    assert!(replay_trace(&inst.space, &inst.map, &cfg.variants[0], &parsed.steps, DEFAULT_TOL_FEAS)
        .unwrap()
        .is_empty());
}

#[test]
fn hypothesis_violation_exits_two_and_replays() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = r#"{"scenario":"paper-example","variant":"GABA_PHI","phi":0.5}"#;
    let o = qpm(tmp.path(), config, &["--command", "check-hypotheses", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let rep = report(&out, "check-hypotheses");
    assert_eq!(rep["reports"][0]["witnesses"][0]["x"], 6.0);

    let stored: HypothesisReport = serde_json::from_value(rep["reports"][0].clone()).unwrap();
    let cfg = parse_config(config).unwrap();
    let inst = cfg.instance(None).unwrap();
    let opts = HypothesisOptions { grid_step: inst.grid, ..Default::default() };
    let again = exhaustive_hypothesis_check(&inst.space, &inst.map, &cfg.variants[0], &opts).unwrap();
    assert_eq!(stored, again);
}

#[test]
fn v1_from_six_exits_two() {
    let tmp = TempDir::new().unwrap();
    let config = EXAMPLE_V1.replace("\"x0\":10", "\"x0\":6");
    let o = qpm(tmp.path(), &config, &["--command", "solve"]);
    assert_eq!(o.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("hypothesis-violation"));
}

#[test]
fn max_iterations_exits_two() {
    let tmp = TempDir::new().unwrap();
    let o = qpm(tmp.path(), EXAMPLE_V1, &["--command", "solve", "--max-iter", "3", "--quiet"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn triangle_violation_exits_two() {
    let tmp = TempDir::new().unwrap();
    let config = r#"{"scenario":"custom","space":{"kind":"matrix","dist":[[0,1,5],[1,0,1],[1,1,0]]},"map":{"kind":"closedform","rule":"identity"}}"#;
    let o = qpm(tmp.path(), config, &["--command", "check-space"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"via\": 2.0"));
}

#[test]
fn schema_and_usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let o = qpm(tmp.path(), "{}", &["--command", "solve"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("$.scenario"));

    let bad_rule =
        r#"{"scenario":"custom","space":{"kind":"interval","lo":0,"hi":1},"map":{"kind":"closedform","rule":"cube"}}"#;
    let o = qpm(tmp.path(), bad_rule, &["--command", "check-space"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"cube\""));

    let o = qpm(tmp.path(), EXAMPLE_V1, &["--command", "solve", "--eps", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = qpm(tmp.path(), EXAMPLE_V1, &["--command", "frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_qpm")).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn random_oracle_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let config = r#"{"scenario":"random","random":{"n":5,"max_card":2},"variants":[{"variant":"V3","phi":{"kind":"affine","slope":0.5,"intercept":0},"eta":{"kind":"affine","slope":0.75,"intercept":0}},{"variant":"GABA_C","c":0.5,"mode":"fixed"}]}"#;
    let run = |seed: &str| {
        let o = qpm(tmp.path(), config, &["--command", "oracle", "--seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn paper_example_oracle_lists_points() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = qpm(tmp.path(), EXAMPLE_V1, &["--command", "oracle", "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    let rep = report(&out, "oracle");
    assert_eq!(rep["points"]["start"], serde_json::json!([0.0]));
    assert_eq!(rep["points"]["end"].as_array().unwrap().len(), 21);
    assert_eq!(rep["variants"][0]["agreement"], "not-applicable");
}
