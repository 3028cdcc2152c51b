use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dqlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqlab"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("suite.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn quick_suite_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = config("quick.json");
    let ra = dqlab(&["run", cfg.to_str().unwrap()], &a);
    assert_eq!(ra.status.code(), Some(0), "{}", String::from_utf8_lossy(&ra.stderr));
    let rb = dqlab(&["run", cfg.to_str().unwrap()], &b);
    assert_eq!(rb.status.code(), Some(0));
    let (fa, fb) = (files(&a), files(&b));
    assert!(fa.iter().any(|(p, _)| p.ends_with("summary.json")));
    assert!(fa.iter().any(|(p, _)| p.ends_with("hat-mc/comparison.csv")));
    assert_eq!(fa, fb);
}

#[test]
fn summary_rows_carry_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dqlab(&["constants"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    let rows = doc["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        assert_eq!(r["pass"], true);
        assert!(!r["formula"].as_str().unwrap().is_empty());
        assert!(r["predicted"].is_number() && r["tolerance"].is_number());
    }
    let csv = std::fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert!(csv.starts_with("experiment,kind,item,quantity,value,error,predicted,tolerance,formula,constants,pass,status"));
}

#[test]
fn report_reprints_summary() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(dqlab(&["constants"], tmp.path()).status.code(), Some(0));
    let out = dqlab(&["report"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn subcommand_filters_config_by_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("quick.json");
    let out = dqlab(&["constants", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert!(doc["rows"].as_array().unwrap().iter().all(|r| r["kind"] == "constants"));
    assert_eq!(doc["seed"], 11);
}

#[test]
fn malformed_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "{ not json");
    assert_eq!(dqlab(&["run", cfg.to_str().unwrap()], tmp.path()).status.code(), Some(2));
}

#[test]
fn wrong_schema_version_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"schema_version": 7, "experiments": []}"#);
    assert_eq!(dqlab(&["run", cfg.to_str().unwrap()], tmp.path()).status.code(), Some(2));
}

#[test]
fn unknown_field_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "experiments": [{"kind": "constants", "name": "c", "dims": [1], "ps": [1], "tolerance": 1e-10, "extra": 1}]}"#,
    );
    assert_eq!(dqlab(&["run", cfg.to_str().unwrap()], tmp.path()).status.code(), Some(2));
}

#[test]
fn unknown_function_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "experiments": [{"kind": "bbm", "name": "b", "functions": ["sawtooth"], "p": 1, "tolerance": 0.02}]}"#,
    );
    let out = dqlab(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let summary = std::fs::read_to_string(tmp.path().join("summary.json")).unwrap();
    assert!(summary.contains("unknown-function"));
}

#[test]
fn bad_flag_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(dqlab(&["constants", "--tolerance-scale", "-1"], tmp.path()).status.code(), Some(2));
    assert_eq!(dqlab(&["no-such-command"], tmp.path()).status.code(), Some(2));
}

#[test]
fn endpoint_maximum_exits_3() {
    // For small λ, λ μ(λ) of the hat with b = 2, γ = 1 grows like λ^{1/2},
    // so the weak maximum sits on the last node of this window.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "experiments": [{"kind": "norms", "name": "n", "functions": ["hat"], "gamma": 1, "b": 2, "p": 1,
            "lambdas": {"lo": 0.001, "hi": 0.01, "per_decade": 4}, "engine": "oracle"}]}"#,
    );
    let out = dqlab(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn tightened_tolerance_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "experiments": [{"kind": "wavelet", "name": "w", "functions": ["hat"], "gammas": [1], "levels": [6, 7, 8], "tolerance": 1e-9}]}"#,
    );
    let out = dqlab(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stdout));
}
