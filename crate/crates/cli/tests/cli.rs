use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PARAMS: &str = r#""params": {"alpha": [1, 1], "gamma": [1, 1], "beta": 1, "q": [2, 2], "p": 1}"#;

fn config(grid: &str, task: &str) -> String {
    format!(r#"{{"system": "two-plus-one", {PARAMS}, "grid": {grid}, "task": {task}}}"#)
}

fn reference_grid() -> &'static str {
    r#"{"length": 80, "points": 512}"#
}

fn dlab(dir: &TempDir, json: &str, out: &str, args: &[&str], threads_env: Option<&str>) -> Output {
    let path = dir.path().join("config.json");
    fs::write(&path, json).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dlab"));
    cmd.arg(&path).arg("--out").arg(dir.path().join(out)).args(args);
    cmd.env_remove("DLAB_THREADS");
    if let Some(v) = threads_env {
        cmd.env("DLAB_THREADS", v);
    }
    cmd.output().unwrap()
}

fn error_of(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&out.stderr)));
    v["error"].clone()
}

/// Every file under `root`, keyed by relative path.
fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, acc);
            } else {
                let key = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                acc.insert(key, fs::read(&p).unwrap());
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(root, root, &mut acc);
    acc
}

fn manifest_without_clock(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("wall_time_seconds");
    v
}

fn assert_same_outputs(a: &Path, b: &Path) {
    let sa = snapshot(a);
    let sb = snapshot(b);
    assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
    for (name, bytes) in &sa {
        if name.ends_with("manifest.json") {
            assert_eq!(manifest_without_clock(bytes), manifest_without_clock(&sb[name]), "{name}");
        } else {
            assert!(bytes == &sb[name], "{name} differs");
        }
    }
}

#[test]
fn soliton_table_peaks_at_three_halves_speed_over_beta() {
    let dir = TempDir::new().unwrap();
    let out = dlab(&dir, &config(reference_grid(), r#"{"soliton": {"speed": 1}}"#), "o", &[], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("o/soliton.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("x,value"));
    let center = lines.find(|l| l.starts_with("0.0000000000000000e0,")).unwrap();
    let value: f64 = center.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(value, 3.0);
    let manifest: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn groundstate_reports_negative_value_and_positive_multipliers() {
    let dir = TempDir::new().unwrap();
    let out = dlab(&dir, &config(reference_grid(), r#"{"groundstate": {"r": 1, "l": 1, "m": 1}}"#), "o", &[], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_slice(&out.stdout).unwrap();
    let v = &manifest["verdicts"];
    assert_eq!(v["converged"], true);
    assert!(v["value"].as_f64().unwrap() < 0.0);
    assert!(v["sigma1"].as_f64().unwrap() > 0.0);
    assert!(v["sigma2"].as_f64().unwrap() > 0.0);
    assert!(v["c"].as_f64().unwrap() > 0.0);
    let written: Value = serde_json::from_slice(&fs::read(dir.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(written, manifest);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("not json", "{\"system\": "),
        ("unknown key", r#"{"system": "two-plus-one", "colour": 1}"#),
        (
            "even denominator",
            r#"{"system": "two-plus-one", "params": {"alpha": [1, 1], "gamma": [1, 1], "beta": 1, "q": [2, 2], "p": "1/2"},
               "grid": {"length": 80, "points": 512}, "task": {"soliton": {"speed": 1}}}"#,
        ),
        ("odd grid", &config(r#"{"length": 80, "points": 511}"#, r#"{"soliton": {"speed": 1}}"#)),
    ];
    for (tag, json) in cases {
        let out = dlab(&dir, json, "o", &[], None);
        assert_eq!(out.status.code(), Some(2), "{tag}");
        let err = error_of(&out);
        assert_eq!(err["exit_code"], 2, "{tag}");
        assert_eq!(err["kind"], "config", "{tag}");
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_dlab")).arg(dir.path().join("absent.json")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn thread_count_is_validated() {
    let dir = TempDir::new().unwrap();
    let json = config(reference_grid(), r#"{"soliton": {"speed": 1}}"#);
    for bad in ["0", "many", "-3"] {
        let out = dlab(&dir, &json, "o", &[], Some(bad));
        assert_eq!(out.status.code(), Some(2), "DLAB_THREADS={bad}");
    }
    assert_eq!(dlab(&dir, &json, "o", &["--threads", "0"], None).status.code(), Some(2));
    assert!(dlab(&dir, &json, "o", &[], Some("2")).status.success());
    // The flag wins over the environment.
    assert!(dlab(&dir, &json, "o", &["--threads", "1"], Some("junk")).status.success());
}

#[test]
fn blowup_guard_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"system": "two-plus-one",
        "params": {"alpha": [0, 0], "gamma": [1, 1], "beta": 1, "q": [6, 6], "p": 1},
        "grid": {"length": 20, "points": 256},
        "integrator": {"dt": 1e-5, "monitor_stride": 100, "max_h1": 1},
        "task": {"simulate": {"t_final": 0.01, "initial": [[{"shape": "gauss", "amplitude": 3, "width": 0.5}], [], []]}}}"#;
    let out = dlab(&dir, json, "o", &[], None);
    assert_eq!(out.status.code(), Some(3));
    let err = error_of(&out);
    assert_eq!(err["kind"], "numerical");
    let manifest: Value = serde_json::from_slice(&fs::read(dir.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_ne!(manifest["status"], "ok");
}

#[test]
fn starved_minimizer_exits_with_four() {
    let dir = TempDir::new().unwrap();
    let json = config(reference_grid(), r#"{"groundstate": {"r": 1, "l": 1, "m": 1, "max_iters": 2}}"#);
    let out = dlab(&dir, &json, "o", &[], None);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_of(&out)["kind"], "non_convergence");
    assert!(dir.path().join("o/profile.csv").exists());
}

#[test]
fn repeated_simulation_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let json = config(
        r#"{"length": 60, "points": 256}"#,
        r#"{"simulate": {"t_final": 0.5, "initial": [
            [{"shape": "sech", "amplitude": 1, "wavenumber": 0.3}],
            [{"shape": "sech", "amplitude": 0.8, "center": 2}],
            [{"shape": "sech2", "amplitude": 1.5, "center": -1}]]}}"#,
    );
    assert!(dlab(&dir, &json, "a", &[], None).status.success());
    assert!(dlab(&dir, &json, "b", &[], None).status.success());
    assert_same_outputs(&dir.path().join("a"), &dir.path().join("b"));
}

#[test]
fn sweep_does_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let json = config(
        r#"{"length": 60, "points": 256}"#,
        r#"{"sweep": {"r": [0.5, 1], "l": [1], "m": [0.5, 1]}}"#,
    );
    assert!(dlab(&dir, &json, "one", &["--threads", "1"], None).status.success());
    assert!(dlab(&dir, &json, "three", &["--threads", "3"], None).status.success());
    assert_same_outputs(&dir.path().join("one"), &dir.path().join("three"));
    let table = fs::read_to_string(dir.path().join("one/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.lines().skip(1).all(|l| l.contains(",true,")));
}
