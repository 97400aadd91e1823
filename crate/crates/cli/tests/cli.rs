//! End-to-end tests of the `corrmax` binary: subcommand output, file
//! round-trips, exit codes, and the CORRMAX_SEED fallback.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn corrmax() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corrmax"))
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write_singlet(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("singlet.json");
    fs::write(&path, r#"{"named": {"variant": "singlet"}}"#).unwrap();
    path
}

#[test]
fn demo_trine_reports_saddle() {
    let output = corrmax().args(["demo", "trine"]).output().unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("0.666666666667"));
    assert!(text.contains("saddle"));
    assert!(text.contains("true / true"));
}

#[test]
fn demo_trine_json_is_machine_readable() {
    let output = corrmax().args(["demo", "trine", "--json"]).output().unwrap();
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert!((value["coincidence"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(value["classification"], "saddle");
}

#[test]
fn bound_cross_norm_of_singlet() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_singlet(dir.path());
    let output = corrmax()
        .args(["bound", "--state"])
        .arg(&state)
        .args(["--kind", "cross-norm", "--json"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert!((value[0]["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn solve_pure_state_reaches_unity() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("bell.json");
    fs::write(&state, r#"{"named": {"variant": "trine_demo"}}"#).unwrap();
    let pom_a = dir.path().join("a.json");
    let output = corrmax()
        .args(["solve", "--state"])
        .arg(&state)
        .args(["--n", "2", "--restarts", "4", "--seed", "3", "--json", "--out-pom-a"])
        .arg(&pom_a)
        .output()
        .unwrap();
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert!((value["coincidence"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(value["classification"], "local_max");
    // The emitted POM file parses back.
    let pom: serde_json::Value = serde_json::from_str(&fs::read_to_string(&pom_a).unwrap()).unwrap();
    assert_eq!(pom["dim"], 2);
}

#[test]
fn check_certifies_trine_files() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("bell.json");
    fs::write(&state, r#"{"named": {"variant": "trine_demo"}}"#).unwrap();
    // Trine kets sqrt(2/3) |phi_j>.
    let w = (2.0f64 / 3.0).sqrt();
    let h = 3.0f64.sqrt() / 2.0;
    let kets = vec![
        vec![[w, 0.0], [0.0, 0.0]],
        vec![[0.5 * w, 0.0], [h * w, 0.0]],
        vec![[0.5 * w, 0.0], [-h * w, 0.0]],
    ];
    let pom_path = dir.path().join("trine.json");
    fs::write(
        &pom_path,
        serde_json::json!({"dim": 2, "kets": kets}).to_string(),
    )
    .unwrap();
    let output = corrmax()
        .args(["check", "--state"])
        .arg(&state)
        .arg("--pom-a")
        .arg(&pom_path)
        .arg("--pom-b")
        .arg(&pom_path)
        .args(["--json"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert!(value["extremal"].as_bool().unwrap());
    assert_eq!(value["classification"], "saddle");
    assert!((value["coincidence"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn convert_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let named = dir.path().join("in.json");
    fs::write(
        &named,
        r#"{"named": {"variant": "isotropic", "params": {"w": 0.4}}}"#,
    )
    .unwrap();
    let out1 = dir.path().join("out1.json");
    let out2 = dir.path().join("out2.json");
    assert!(corrmax()
        .arg("convert")
        .arg(&named)
        .arg(&out1)
        .status()
        .unwrap()
        .success());
    assert!(corrmax()
        .arg("convert")
        .arg(&out1)
        .arg(&out2)
        .status()
        .unwrap()
        .success());
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());
}

#[test]
fn scan_runs_and_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("scan.jsonl");
    let output = corrmax()
        .args([
            "scan", "--dims", "2,2", "--count", "5", "--ns", "2,3", "--seed", "9",
            "--restarts", "3", "--json", "--out",
        ])
        .arg(&records)
        .output()
        .unwrap();
    assert!(output.status.success());
    let live: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(live["count"], 5);
    assert!(live["max_gap"].as_f64().unwrap() <= 1e-5);

    let output = corrmax()
        .args(["scan", "--summarize", "--json", "--out"])
        .arg(&records)
        .output()
        .unwrap();
    assert!(output.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(live, summary);
}

#[test]
fn scan_seed_falls_back_to_env() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("env.jsonl");
    let output = corrmax()
        .env("CORRMAX_SEED", "777")
        .args([
            "scan", "--dims", "2,2", "--count", "2", "--restarts", "2", "--json", "--out",
        ])
        .arg(&records)
        .output()
        .unwrap();
    assert!(output.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(summary["seed"], 777);
}

#[test]
fn demo_mirror_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("mirror.csv");
    let output = corrmax()
        .args(["demo", "mirror", "--points", "101", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 102);
    assert_eq!(lines[0], "x,value");
    // Spot value at alpha = 0: C = 2/3 + 3/4 * (1/3)^2 = 0.75.
    let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - 0.75).abs() < 1e-12);
}

#[test]
fn bound_sweep_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("iso.csv");
    let output = corrmax()
        .args(["bound", "--sweep", "isotropic", "--kind", "two-qubit", "--points", "11", "--csv"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    for line in text.lines().skip(1) {
        let mut parts = line.split(',');
        let w: f64 = parts.next().unwrap().parse().unwrap();
        let value: f64 = parts.next().unwrap().parse().unwrap();
        let want = 0.5 * (1.0 + (4.0 * w - 1.0).abs() / 3.0);
        assert!((value - want).abs() < 1e-9);
    }
}

#[test]
fn validation_failures_exit_two() {
    // Missing file.
    let status = corrmax()
        .args(["bound", "--state", "/nonexistent/state.json", "--kind", "cross-norm"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Unknown bound kind.
    let dir = tempfile::tempdir().unwrap();
    let state = write_singlet(dir.path());
    let status = corrmax()
        .args(["bound", "--state"])
        .arg(&state)
        .args(["--kind", "bogus"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Schema violation: trace != 1.
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"dims": [2, 2], "matrix": [
            [[1.0,0],[0,0],[0,0],[0,0]],
            [[0,0],[1.0,0],[0,0],[0,0]],
            [[0,0],[0,0],[0,0],[0,0]],
            [[0,0],[0,0],[0,0],[0,0]]]}"#,
    )
    .unwrap();
    let status = corrmax()
        .args(["bound", "--state"])
        .arg(&bad)
        .args(["--kind", "two-qubit"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Dimension mismatch: qutrit state against the two-qubit bound.
    let qutrit = dir.path().join("qutrit.json");
    fs::write(
        &qutrit,
        r#"{"named": {"variant": "werner", "params": {"d": 3, "x": 0.5}}}"#,
    )
    .unwrap();
    let status = corrmax()
        .args(["bound", "--state"])
        .arg(&qutrit)
        .args(["--kind", "two-qubit"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Unknown flags are rejected (clap uses exit code 2).
    let status = corrmax()
        .args(["demo", "trine", "--frobnicate"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn bound_dump_writes_spin_matrix_csv() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_singlet(dir.path());
    let matrix_csv = dir.path().join("s.csv");
    let singular_csv = dir.path().join("sv.csv");
    let status = corrmax()
        .args(["bound", "--state"])
        .arg(&state)
        .args(["--kind", "two-qubit", "--dump-matrix"])
        .arg(&matrix_csv)
        .arg("--dump-singular")
        .arg(&singular_csv)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&matrix_csv).unwrap();
    assert!(text.starts_with("p,q,value\n"));
    assert_eq!(text.lines().count(), 10);
    // Singlet spin matrix is -I: diagonal entries -1.
    let diag: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!((diag + 1.0).abs() < 1e-12);
    let sv = fs::read_to_string(&singular_csv).unwrap();
    assert_eq!(sv.lines().count(), 4);
}

#[test]
fn unwritable_output_exits_three() {
    let status = corrmax()
        .args(["demo", "mirror", "--points", "5", "--out", "/nonexistent/dir/mirror.csv"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn scan_resume_hash_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("scan.jsonl");
    assert!(corrmax()
        .args(["scan", "--dims", "2,2", "--count", "2", "--seed", "1", "--restarts", "2", "--out"])
        .arg(&records)
        .status()
        .unwrap()
        .success());
    let status = corrmax()
        .args([
            "scan", "--dims", "2,2", "--count", "2", "--seed", "2", "--restarts", "2", "--resume",
            "--out",
        ])
        .arg(&records)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn werner_demo_table_has_expected_shape() {
    let output = corrmax().args(["demo", "werner", "--d", "3"]).output().unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,exact,theorem_n3,cross_norm");
    assert_eq!(lines.len(), 10);
    // x = 1 row: exact = 1/2, cross norm = 1.
    let last: Vec<&str> = lines[9].split(',').collect();
    let exact: f64 = last[1].parse().unwrap();
    let cross: f64 = last[3].parse().unwrap();
    assert!((exact - 0.5).abs() < 1e-9);
    assert!((cross - 1.0).abs() < 1e-9);
}
