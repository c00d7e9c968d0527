use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fpwalk(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpwalk")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn manifest(out: &Path) -> Value {
    serde_json::from_slice(&fs::read(out.join("manifest.json")).expect("manifest exists")).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [0.5, 0.5]}, "budgets": {"ball_radius": 2, "n_max": 6}, "seed": 3}"#;

#[test]
fn selftest_passes_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = fpwalk(&["selftest"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(dir.path());
    assert_eq!(m["status"], "complete");
    assert!(m["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn malformed_configs_exit_with_code_2_and_leave_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [0.5, 0.5]}, "budgets": {"ball_radius": -1}}"#,
        r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [0.5]}}"#,
        r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [0.5, 0.5], "laziness": 1.5}}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        let sub = dir.path().join(format!("case{i}"));
        fs::create_dir_all(&sub).unwrap();
        let cfg = write_config(&sub, text);
        let out = sub.join("out");
        let o = fpwalk(&["validate", "--config", cfg.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
        let m = manifest(&out);
        assert_eq!(m["status"], "failed");
        assert_eq!(m["error"]["exit_code"], 2);
    }
}

#[test]
fn unknown_keys_warn_unless_strict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [0.5, 0.5]}, "budgets": {"bal_radius": 2}}"#);
    let o = fpwalk(&["validate", "--config", cfg.to_str().unwrap()], &dir.path().join("lax"));
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bal_radius"));
    assert!(manifest(&dir.path().join("lax"))["warnings"].to_string().contains("bal_radius"));
    let o = fpwalk(&["validate", "--strict", "--config", cfg.to_str().unwrap()], &dir.path().join("strict"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exhausted_element_budget_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace(r#""n_max": 6"#, r#""n_max": 6, "element_cap": 20"#));
    let o = fpwalk(&["green-table", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(manifest(&dir.path().join("out"))["error"]["exit_code"], 3);
}

#[test]
fn experiment_selector_must_match_the_verb() {
    let dir = tempfile::tempdir().unwrap();
    let o = fpwalk(&["ray-scan", "--config", fixture("z3z.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

fn artifacts(out: &Path) -> Vec<(String, Vec<u8>)> {
    let m = manifest(out);
    m["artifacts"].as_array().unwrap().iter().map(|a| {
        let p = a["path"].as_str().unwrap().to_string();
        let bytes = fs::read(out.join(&p)).unwrap();
        (p, bytes)
    }).collect()
}

#[test]
fn reruns_are_byte_identical_and_the_cache_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let cache = dir.path().join("cache");
    let run = |name: &str, cached: bool| {
        let out = dir.path().join(name);
        let mut args = vec!["green-table", "--config", cfg.to_str().unwrap()];
        if cached {
            args.extend(["--cache", cache.to_str().unwrap()]);
        }
        let o = fpwalk(&args, &out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let plain = artifacts(&run("a", false));
    assert_eq!(plain, artifacts(&run("b", false)));
    let cold = run("cold", true);
    let warm = run("warm", true);
    assert_eq!(manifest(&cold)["cache"]["misses"], 1);
    assert_eq!(manifest(&warm)["cache"]["hits"], 1);
    assert_eq!(plain, artifacts(&cold));
    assert_eq!(plain, artifacts(&warm));
    assert_eq!(manifest(&cold)["config_hash"], manifest(&warm)["config_hash"]);
}

#[test]
fn seed_override_changes_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(fpwalk(&["validate", "--config", cfg.to_str().unwrap()], &a).status.success());
    assert!(fpwalk(&["validate", "--seed", "99", "--config", cfg.to_str().unwrap()], &b).status.success());
    assert_eq!(manifest(&b)["seed"], 99);
    assert_ne!(manifest(&a)["config_hash"], manifest(&b)["config_hash"]);
}

#[test]
fn csv_artifacts_document_every_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    assert!(fpwalk(&["green-table", "--config", cfg.to_str().unwrap()], &out).status.success());
    let text = fs::read_to_string(out.join("green-table.csv")).unwrap();
    let comments: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(comments[0].starts_with("# operation: green-table"));
    for name in header.split(',') {
        let tag = format!("# column {name}");
        assert!(comments.iter().any(|c| c.strip_prefix(&tag).is_some_and(|r| r.starts_with(':') || r.starts_with(" ["))), "column {name} undocumented");
    }
    let m = manifest(&out);
    let rows = m["artifacts"].as_array().unwrap().iter().find(|a| a["path"] == "green-table.csv").unwrap()["rows"].as_u64().unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count() as u64, rows + 1);
}

#[test]
fn every_config_verb_runs_on_a_small_group() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for verb in ["validate", "spectral-report", "radical", "ray-scan", "llt-fit"] {
        let out = dir.path().join(verb);
        let o = fpwalk(&[verb, "--config", cfg.to_str().unwrap()], &out);
        assert!(o.status.success(), "{verb}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(format!("{verb}.json")).exists());
    }
}
