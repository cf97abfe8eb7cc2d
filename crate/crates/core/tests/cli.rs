use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ctxdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxdiv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn validate_bundled_is_clean() {
    let o = ctxdiv(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn validate_reports_findings_as_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    fs::write(
        &csv,
        "date,model,max_context_tokens,source\n2017-06,A,512,x\n2023-07,Claude 2,100000,x\n2023-07,Claude 2,100000,x\n",
    )
    .unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{{"timeline_path": "{}"}}"#, csv.display()));
    let o = ctxdiv(&["--config", &cfg, "validate"]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    assert!(out.contains("duplicate"));
}

#[test]
fn missing_timeline_exits_4_with_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"timeline_path": "nope.csv"}"#);
    let out = dir.path().join("out");
    let o = ctxdiv(&["--config", &cfg, "--out", out.to_str().unwrap(), "report"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("stage: timeline, file not found"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn malformed_row_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    fs::write(&csv, "date,model,max_context_tokens,source\n2017-06,A,lots,x\n").unwrap();
    let cfg = write_config(dir.path(), r#"{"timeline_path": "t.csv"}"#);
    let o = ctxdiv(&["--config", &cfg, "fit"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 1"), "{}", stderr(&o));
}

#[test]
fn domain_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"bootstrap_resamples": 10}"#);
    let o = ctxdiv(&["--config", &cfg, "fit"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn report_writes_identical_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = ctxdiv(&["--seed", "7", "--out", out.to_str().unwrap(), "report"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ctxdiv::report::BUNDLE_FILES {
        let x = fs::read(a.join(name)).unwrap();
        let y = fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name}");
        assert!(String::from_utf8_lossy(&x).contains("seed"), "{name}");
    }
    let md = fs::read_to_string(a.join("report.md")).unwrap();
    assert!(md.contains("| Baseline | 2.0 | 1.5 | 1.2 | 16,000 | 1,800 | 1,111 | 83 |"));
    assert!(md.contains("4,700") && md.contains("6,000"));
    assert!(md.contains("exclusions: Llama 4 Scout"));
    assert!(md.contains("- seed: 7"));
}

#[test]
fn subcommands_print_tables() {
    let o = ctxdiv(&["ecs", "--policy", "anchored"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("year,ecs_tokens\n"));
    assert_eq!(out.lines().count(), 24);

    let o = ctxdiv(&["divergence"]);
    assert!(stdout(&o).starts_with("year,ai_tokens,ecs_tokens,raw_ratio,qa_ratio"));
    assert!(stderr(&o).contains("2022"));

    let o = ctxdiv(&["fit", "--preset", "appendixA-monthly"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["preset"], "appendixA-monthly");

    let o = ctxdiv(&["loop", "--periods", "12", "--intervene", "4"]);
    assert_eq!(stdout(&o).lines().count(), 14);

    let o = ctxdiv(&["sensitivity"]);
    assert_eq!(stdout(&o).lines().count(), 7);
}
