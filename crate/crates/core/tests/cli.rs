use std::fs;
use std::process::Command;

fn csmac() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csmac"))
}

#[test]
fn analyze_prints_timing() {
    let out = csmac().arg("analyze").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("t (rtt slots)     3334"), "{text}");
    assert!(text.contains("p (frame slots)   30000"), "{text}");
}

#[test]
fn invalid_parameters_exit_with_code_two() {
    let out = csmac().args(["analyze", "--set", "n=1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = csmac()
        .args(["simulate", "--set", "bogus=3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_config_is_a_config_error() {
    let out = csmac()
        .args(["analyze", "--config", "/nonexistent/cfg.txt"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_code_one() {
    let out = csmac()
        .args(["analyze", "--out", "/nonexistent/dir/out.txt"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig7.csv");
    let status = csmac()
        .args([
            "sweep", "--figure", "7", "--frames", "100", "--seed", "5", "--out",
        ])
        .arg(&csv)
        .args([
            "--set",
            "r_values=4,10",
            "--set",
            "k_values=1,2",
            "--set",
            "q_values=8",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // Per r: two CS rows, one baseline, one zero-reservation row.
    assert_eq!(rows.len(), 8);

    let zero = rows
        .iter()
        .find(|r| r[col("scheme")] == "zero-reservation")
        .unwrap();
    let ceiling: f64 = zero[col("throughput")].parse().unwrap();
    for row in &rows {
        let thr: f64 = row[col("throughput")].parse().unwrap();
        assert!(thr <= ceiling + 1e-12, "{row:?}");
    }

    let manifest = fs::read_to_string(dir.path().join("fig7.manifest.txt")).unwrap();
    assert!(manifest.contains("figure = 7"));
    assert!(manifest.contains("master_seed = 5"));
    assert!(manifest.contains("csv_schema = csmac-sweep-v1"));
}

#[test]
fn compare_reports_a_verdict() {
    let out = csmac()
        .args(["compare", "--set", "scheme=digital", "--set", "k=4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict"), "{text}");
}
