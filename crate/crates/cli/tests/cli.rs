//! End-to-end checks of the `sandpile` binary: exit codes, artifact
//! layout, reproducibility, and config-file replay.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sandpile"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp_path(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("sandpile-cli-{}-{tag}", std::process::id()))
}

#[test]
fn reruns_are_byte_identical() {
    let path = tmp_path("rerun.csv");
    let args = [
        "threshold",
        "--family",
        "bracelet",
        "--n",
        "500",
        "--trials",
        "20",
        "--seed",
        "9",
        "--output",
    ];
    let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    full.push(path.display().to_string());
    let argv: Vec<&str> = full.iter().map(|s| s.as_str()).collect();

    let first = run(&argv);
    assert!(first.status.success(), "first run failed: {first:?}");
    let bytes_a = fs::read(&path).unwrap();
    let second = run(&argv);
    assert!(second.status.success());
    let bytes_b = fs::read(&path).unwrap();
    assert_eq!(bytes_a, bytes_b, "same spec and seed must give identical bytes");
    assert_eq!(stdout_of(&first), stdout_of(&second));
    let _ = fs::remove_file(&path);
}

#[test]
fn artifacts_embed_the_run_spec() {
    let path = tmp_path("header.csv");
    let out = run(&[
        "threshold",
        "--family",
        "cycle",
        "--n",
        "1000",
        "--trials",
        "10",
        "--output",
        &path.display().to_string(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let tool = lines.next().unwrap();
    assert!(
        tool.starts_with("# sandpile "),
        "first header line names the tool: {tool}"
    );
    let spec_line = lines.next().unwrap();
    let json = spec_line.strip_prefix("# spec: ").expect("spec header line");
    let spec: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(spec["command"], "threshold");
    assert_eq!(spec["family"], "cycle");
    assert_eq!(spec["seed"], 1);
    let header = lines.next().unwrap();
    assert!(header.starts_with("graph_family,size,seed,stream_id,m,density,h0"));
    assert_eq!(header.split(',').count(), 16);
    assert_eq!(lines.next().unwrap().split(',').count(), 16);
    let _ = fs::remove_file(&path);
}

#[test]
fn json_artifacts_carry_the_summary_fields() {
    let path = tmp_path("summary.json");
    let out = run(&[
        "threshold",
        "--family",
        "cycle",
        "--n",
        "1000",
        "--trials",
        "10",
        "--output",
        &path.display().to_string(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["family", "size", "n_trials", "zeta_c_hat", "stderr", "marginals", "mean_topples"] {
        assert!(v.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(v["n_trials"], 10);
    assert_eq!(v["marginals"].as_array().unwrap().len(), 9);
    let _ = fs::remove_file(&path);
}

#[test]
fn config_file_replays_like_flags() {
    let path = tmp_path("spec.json");
    fs::write(
        &path,
        r#"{"command":"threshold","family":"bracelet","size":400,"n_trials":15,"seed":5}"#,
    )
    .unwrap();
    let from_config = run(&["--config", &path.display().to_string()]);
    let from_flags = run(&[
        "threshold", "--family", "bracelet", "--n", "400", "--trials", "15", "--seed", "5",
    ]);
    assert!(from_config.status.success());
    assert!(from_flags.status.success());
    assert_eq!(stdout_of(&from_config), stdout_of(&from_flags));
    let _ = fs::remove_file(&path);
}

#[test]
fn worker_count_never_changes_numbers() {
    let args = [
        "density-response",
        "--family",
        "cycle",
        "--n",
        "2000",
        "--lambda",
        "0.5,1.5",
        "--trials",
        "8",
    ];
    let one = bin().args(args).args(["--workers", "1"]).output().unwrap();
    let many = bin().args(args).args(["--workers", "3"]).output().unwrap();
    assert!(one.status.success());
    assert!(many.status.success());
    assert_eq!(stdout_of(&one), stdout_of(&many));
}

#[test]
fn exit_codes_separate_failure_modes() {
    let ok = run(&["verify", "--suite", "small-oracles"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = stdout_of(&ok);
    assert!(text.contains("12/12 checks passed"), "got: {text}");

    let bad_family = run(&["threshold", "--family", "dodecahedron", "--n", "10"]);
    assert_eq!(bad_family.status.code(), Some(1));
    assert!(!bad_family.stderr.is_empty());

    let bad_flags = run(&["threshold"]);
    assert_eq!(bad_flags.status.code(), Some(1));

    let exhausted = run(&[
        "activity-response",
        "--family",
        "flower",
        "--n",
        "50",
        "--lambda",
        "1.0",
        "--trials",
        "5",
        "--max-steps",
        "2",
    ]);
    assert_eq!(exhausted.status.code(), Some(2), "orbit budget exhaustion");

    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout_of(&help).contains("threshold"));
}

#[test]
fn analytic_mode_prints_known_values() {
    let fam = run(&["analytic", "--family", "bracelet"]);
    assert!(fam.status.success());
    let line = stdout_of(&fam);
    assert!(line.contains("zeta_s = 2.5"), "got: {line}");
    assert!(line.contains("zeta_c = 2.496608"), "got: {line}");

    let table = run(&["analytic", "table"]);
    assert!(table.status.success());
    let text = stdout_of(&table);
    assert!(text.starts_with("# sandpile "));
    assert!(text.contains("ladder_perron,"));
    assert!(text.contains("cycle_zeta_c,1,"));
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(lines.next(), Some("name,value,status"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 15, "table has {} rows", rows.len());
    for row in rows {
        assert_eq!(row.split(',').count(), 3, "bad row: {row}");
    }
}
