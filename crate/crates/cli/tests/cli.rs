use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const WALK: &str = r#"{"schema_version":1,"id":"walk","kind":"CoupledWalk","speed":1.1,"duration":8,"impedance":"Z_soft","seed":3}"#;

fn gaitlink(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaitlink"))
        .current_dir(dir)
        .env_remove("GAITLINK_OUT")
        .args(args)
        .output()
        .unwrap()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_the_artifacts_and_applies_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("walk.json"), WALK).unwrap();
    let out = gaitlink(dir.path(), &["--out", "o", "run", "walk.json", "--seed", "9", "--impedance", "Z_stiff"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let run = dir.path().join("o/walk");
    for file in ["log.csv", "log.bin", "scenario.json", "summary.json"] {
        assert!(run.join(file).is_file(), "{file}");
    }
    let summary = json(run.join("summary.json"));
    assert_eq!(summary["seed"], 9);
    assert_eq!(summary["impedance"], "Z_stiff");
    assert_eq!(summary["rows"], 800);
    assert_eq!(json(run.join("scenario.json"))["seed"], 9);
}

#[test]
fn output_root_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let with_output = WALK.replace(r#""seed":3"#, r#""seed":3,"output":"from-file""#);
    fs::write(dir.path().join("walk.json"), &with_output).unwrap();
    fs::write(dir.path().join("plain.json"), WALK).unwrap();
    let env_run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_gaitlink"))
            .current_dir(dir.path())
            .env("GAITLINK_OUT", "from-env")
            .args(args)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    };
    env_run(&["--out", "from-flag", "run", "walk.json", "--duration", "2"]);
    assert!(dir.path().join("from-flag/walk/log.csv").is_file());
    env_run(&["run", "walk.json", "--duration", "2"]);
    assert!(dir.path().join("from-file/walk/log.csv").is_file());
    env_run(&["run", "plain.json", "--duration", "2"]);
    assert!(dir.path().join("from-env/walk/log.csv").is_file());
    let out = gaitlink(dir.path(), &["run", "plain.json", "--duration", "2"]);
    assert!(out.status.success());
    assert!(dir.path().join("out/walk/log.csv").is_file());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("walk.json"), WALK).unwrap();
    fs::write(dir.path().join("bad.json"), WALK.replace("1.1", r#""fast""#)).unwrap();

    let out = gaitlink(dir.path(), &["run", "walk.json", "--impedance", "Z_medium"]);
    assert_eq!(out.status.code(), Some(2));
    for name in ["Z_soft", "Z_stiff", "Z6"] {
        assert!(stderr(&out).contains(name), "{}", stderr(&out));
    }
    let out = gaitlink(dir.path(), &["run", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`speed`"), "{}", stderr(&out));
    let out = gaitlink(dir.path(), &["run", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn batch_runs_every_listed_scenario() {
    let dir = tempfile::tempdir().unwrap();
    for id in ["a", "b"] {
        let doc = WALK.replace("walk", id).replace(r#""duration":8"#, r#""duration":3"#);
        fs::write(dir.path().join(format!("{id}.json")), doc).unwrap();
    }
    fs::write(dir.path().join("batch.json"), r#"{"schema_version":1,"scenarios":["a.json","b.json"],"seed":1}"#).unwrap();
    let out = gaitlink(dir.path(), &["--out", "o", "batch", "batch.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let a = json(dir.path().join("o/a/summary.json"));
    let b = json(dir.path().join("o/b/summary.json"));
    assert_ne!(a["seed"], b["seed"]);
}

#[test]
fn analyze_recomputes_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("walk.json"), WALK).unwrap();
    assert!(gaitlink(dir.path(), &["--out", "o", "run", "walk.json"]).status.success());
    let out = gaitlink(dir.path(), &["analyze", "o/walk"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let fresh = json(dir.path().join("o/walk/analysis.json"));
    let stored = json(dir.path().join("o/walk/summary.json"));
    assert_eq!(fresh["metrics"], stored["metrics"]);
    assert_eq!(fresh["max_torque_slope"], stored["max_torque_slope"]);
}

#[test]
fn friction_identification_recovers_the_default_plant() {
    let dir = tempfile::tempdir().unwrap();
    let out = gaitlink(dir.path(), &["--out", "o", "identify-friction", "--duration", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json(dir.path().join("o/friction.json"));
    assert!(report["max_relative_error"].as_f64().unwrap() < 0.05);

    let out = gaitlink(dir.path(), &["identify-friction", "--duration", "0"]);
    assert_eq!(out.status.code(), Some(3));
    let out = gaitlink(dir.path(), &["identify-friction", "--min-freq", "5", "--max-freq", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_figure_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gaitlink(dir.path(), &["reproduce", "fig99"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("fig99"));
}
