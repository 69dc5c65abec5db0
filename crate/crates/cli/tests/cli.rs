use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pdwg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdwg"))
        .args(args)
        .current_dir(dir)
        .env_remove("PDWG_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_shows_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdwg(&["list"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).lines().count() >= 13);
    assert!(stdout(&out).contains("sin_sin_varcoef"));

    let out = pdwg(&["list", "--json"], dir.path());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 21);
    assert_eq!(rows[0]["name"], "constant_one");
}

#[test]
fn run_writes_csv_and_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdwg(&["run", "--case", "constant_one", "--levels", "1,2,4", "--out-dir", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("res/constant_one.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), pdwg::study::CSV_HEADER);
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(csv.lines().count(), 4);
    assert!(!csv.contains(';'));
    let md = fs::read_to_string(dir.path().join("res/constant_one.md")).unwrap();
    assert!(md.contains("| 1/h |"));
    assert!(stdout(&out).contains("| 4 |"));
}

#[test]
fn output_dir_from_environment_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["run", "--case", "constant_one", "--levels", "1,2", "--format", "csv"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_pdwg"))
            .args(&args)
            .current_dir(dir.path())
            .env("PDWG_OUTPUT_DIR", dir.path().join("env"))
            .output()
            .unwrap()
    };
    assert!(run(&[]).status.success());
    assert!(dir.path().join("env/constant_one.csv").exists());
    assert!(!dir.path().join("env/constant_one.md").exists());
    assert!(run(&["--out-dir", "flag", "-o", "named"]).status.success());
    assert!(dir.path().join("flag/named.csv").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"case": "constant_one_left", "levels": [1, 2, 4, 8], "output": "cfg", "emit_diagnostics": true}"#,
    )
    .unwrap();
    let out = pdwg(&["run", "--config", cfg.to_str().unwrap(), "--levels", "2,4", "--out-dir", "."], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("cfg.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cfg.diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag.as_array().unwrap().len(), 2);
    assert!(diag[0]["diagnostics"]["commuting"].as_f64().unwrap() < 1e-10);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["run", "--case", "no_such_case"][..],
        &["run", "--case", "constant_one", "--levels", "1,3"],
        &["run", "--case", "constant_one", "-k", "1"],
        &["run"],
        &["suite", "--levels", "4,2"],
    ] {
        let out = pdwg(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let cfg = dir.path().join("empty.json");
    fs::write(&cfg, r#"{"case": "constant_one", "levels": []}"#).unwrap();
    let out = pdwg(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("level"));
    fs::write(&cfg, r#"{"case": "constant_one", "bogus": 1}"#).unwrap();
    assert_eq!(pdwg(&["run", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(1));
}

#[test]
fn validate_accepts_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdwg(&["validate"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("ok")).count(), 21);
}

#[test]
fn suite_writes_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdwg(&["suite", "--levels", "1,2,4,8", "--tables", "1,2", "--out-dir", "s"], dir.path());
    assert!(out.status.success(), "{}{}", String::from_utf8_lossy(&out.stderr), stdout(&out));
    assert!(stdout(&out).lines().any(|l| l.starts_with("PASS table  1")));
    // multi-case table: one CSV per case, one combined markdown file
    let out = pdwg(&["suite", "--levels", "1,2", "--tables", "18", "--out-dir", "s"], dir.path());
    assert!(out.status.code().is_some_and(|c| c == 0 || c == 2));
    let s = dir.path().join("s");
    for f in [
        "table_01.csv",
        "table_01.md",
        "table_02.md",
        "table_18.md",
        "table_18_suite_exp_xy.csv",
        "summary.md",
        "summary.json",
    ] {
        assert!(s.join(f).exists(), "{f}");
    }
}

#[test]
fn suite_threshold_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdwg(&["suite", "--levels", "8,16,32", "--tables", "3", "--out-dir", "s"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).starts_with("FAIL table  3"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s/summary.json")).unwrap()).unwrap();
    assert_eq!(summary[0]["pass"], false);
}
