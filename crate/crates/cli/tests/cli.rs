use std::path::PathBuf;
use std::process::{Command, Output};

fn currseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_currseq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn count_prints_space_size() {
    let out = currseq(&["count", "--n", "12", "--max-len", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "13345");
}

#[test]
fn count_rejects_length_above_n() {
    let out = currseq(&["count", "--n", "5", "--max-len", "6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max-len"));
}

#[test]
fn bad_invocations_are_usage_errors() {
    assert_eq!(currseq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(currseq(&["count", "--n", "x", "--max-len", "1"]).status.code(), Some(1));
    assert_eq!(currseq(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_config_is_a_runtime_error() {
    let out = currseq(&["optimize", "--config", "/nonexistent/exp.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_writes_report_and_report_renders_it() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy().into_owned();
    let out = currseq(&[
        "optimize",
        "--config",
        &data("experiments/surrogate.toml"),
        "--out",
        &out_dir,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("report.json").is_file());
    let csvs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert!(csvs > 0);

    let table = currseq(&["report", &out_dir]);
    assert_eq!(table.status.code(), Some(0));
    let text = stdout(&table);
    for alg in ["greedy", "beam"] {
        assert!(text.contains(alg), "{text}");
    }
    assert_eq!(text, stdout(&out));
}

#[test]
fn evaluate_reads_encoded_curricula() {
    let cfg = data("experiments/surrogate.toml");
    let out = currseq(&["evaluate", "--config", &cfg, "--curriculum", "m3>m5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["mean"].as_f64().unwrap() + 42.434).abs() < 1e-9, "{v}");

    let bad = currseq(&["evaluate", "--config", &cfg, "--curriculum", "m3>m3"]);
    assert_ne!(bad.status.code(), Some(0));
}
