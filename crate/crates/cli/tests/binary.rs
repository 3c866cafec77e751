//! Process-level checks of the `icta` binary: exit codes and output
//! placement.

use std::io::Write;
use std::process::Command;

fn icta() -> Command {
    Command::new(env!("CARGO_BIN_EXE_icta"))
}

#[test]
fn successful_run_exits_zero_and_writes_the_document() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p.json");
    let status = icta()
        .args([
            "predict",
            "--device",
            "sample_B",
            "--dist",
            "lorentzian:73.8",
            "--xi-grid",
            "0.7:0.8:2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "predict");
}

#[test]
fn xi_grid_containing_one_is_a_validation_error() {
    let status = icta()
        .args([
            "predict",
            "--dist",
            "lorentzian:5.6",
            "--xi-grid",
            "0.5:1.0:6",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn empty_grid_is_a_validation_error() {
    let status = icta()
        .args([
            "sweep",
            "--dist",
            "lorentzian:5.6",
            "--xi-grid",
            "0.5:0.9:3",
            "--freq-grid",
            "4800:4900:0",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn malformed_csv_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("bad.csv");
    let mut f = std::fs::File::create(&csv).unwrap();
    writeln!(f, "wj_mhz,psd").unwrap();
    for i in 0..12 {
        writeln!(f, "{},{}", 4000 + i, 1.0).unwrap();
    }
    writeln!(f, "4020,not_a_number").unwrap();
    drop(f);
    let output = icta().arg("fit-linewidth").arg(&csv).output().unwrap();
    assert_eq!(output.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("not_a_number"), "{stderr}");
    assert!(stderr.contains("14"), "line number missing: {stderr}");
}

#[test]
fn default_output_honors_the_env_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let status = icta()
        .args([
            "predict",
            "--dist",
            "lorentzian:73.8",
            "--device",
            "sample_B",
            "--xi-grid",
            "0.7:0.7:1",
        ])
        .env("ICTA_OUT_DIR", tmp.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(tmp.path().join("predict.json").exists());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let status = icta().arg("frobnicate").status().unwrap();
    assert_eq!(status.code(), Some(2));
}
