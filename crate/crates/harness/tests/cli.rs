use std::path::Path;
use std::process::{Command, Output};

use wvtomo_core::MeasurementRecord;

fn wvtomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wvtomo"))
        .args(args)
        .env_remove("WVTOMO_THREADS")
        .output()
        .expect("binary runs")
}

fn preset(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn fig1_writes_both_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wvtomo(&["fig1", "--config", &preset("paper.json"), "--out", out, "--n-traj", "3000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["fig1_tm005.csv", "fig1_tm05.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("fig1_tm05.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "theta_f,re_wv_true,im_wv_true,re_wv_extracted,im_wv_extracted,re_stderr,im_stderr,fidelity,acceptance,variant,status,rho11_est,re_rho12_est,im_rho12_est"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[9], "linear");
    assert_eq!(first[10], "ok");
    // 17 significant digits in scientific notation.
    assert_eq!(first[0], format!("{:.16e}", 0.1 * std::f64::consts::PI));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["master_seed"], 0);
    assert_eq!(summary["trajectories"], 4 * 3000);
    assert!(summary["version"].as_str().unwrap().len() > 1);
    assert!(summary["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(summary["config"]["n_trajectories"], 3000);
}

#[test]
fn csv_identical_across_thread_counts() {
    let read = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = wvtomo(&["sweep", "--out", dir.path().to_str().unwrap(), "--n-traj", "2000", "--threads", threads]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(dir.path().join("sweep.csv")).unwrap()
    };
    assert_eq!(read("1"), read("3"));
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wvtomo"))
        .args(["sweep", "--out", dir.path().to_str().unwrap(), "--n-traj", "100"])
        .env("WVTOMO_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["threads"], 2);
    let o = Command::new(env!("CARGO_BIN_EXE_wvtomo"))
        .args(["sweep", "--out", dir.path().to_str().unwrap(), "--n-traj", "100"])
        .env("WVTOMO_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn single_point_sweep_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = wvtomo(&[
        "sweep", "--theta-f", "0.65pi", "--eta", "0.8", "--out", dir.path().to_str().unwrap(), "--n-traj", "20000",
        "--seed", "7", "--pps", "bernoulli",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').filter_map(|v| v.parse().ok()).collect())
        .collect();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert!((r[9] - 0.75).abs() < 0.05, "rho11 {}", r[9]);
    assert!((r[10] - 0.34).abs() < 0.05 && (r[11] - 0.265).abs() < 0.05);
}

#[test]
fn record_dumps_are_readable() {
    let dir = tempfile::tempdir().unwrap();
    let o = wvtomo(&["sweep", "--out", dir.path().to_str().unwrap(), "--n-traj", "10", "--dump-records", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("records/phase1_000002.bin");
    let record = MeasurementRecord::<f64>::read_from(std::fs::File::open(path).unwrap()).unwrap();
    assert_eq!(record.samples().len(), 200);
    assert!(!dir.path().join("records/phase0_000003.bin").exists());
}

#[test]
fn usage_and_config_errors_exit_one() {
    let o = wvtomo(&["fig1", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(wvtomo(&["fig9"]).status.code(), Some(1));
    assert_eq!(wvtomo(&[]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n_trajectories": 10, "extra": true}"#).unwrap();
    let o = wvtomo(&["sweep", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("extra"));
    let o = wvtomo(&["sweep", "--config", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(wvtomo(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // A step far too coarse for the measurement rate.
    let cfg = dir.path().join("coarse.json");
    std::fs::write(&cfg, r#"{"readout": {"dt": 100.0}, "n_trajectories": 10}"#).unwrap();
    let o = wvtomo(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // theta_f = pi post-selects on |2>, which cannot be inverted: the row
    // is kept and tagged.
    let o = wvtomo(&["sweep", "--theta-f", "pi", "--out", dir.path().to_str().unwrap(), "--n-traj", "200"]);
    assert_eq!(o.status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains("error: "));
}

#[test]
fn reconstruct_prints_state() {
    let o = wvtomo(&["reconstruct", "--re", "0.0333", "--im", "0.3433", "--theta-f", "0.65pi"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["rho11"].as_f64().unwrap() - 0.75).abs() < 1e-3);
    assert_eq!(wvtomo(&["reconstruct", "--re", "0.2", "--im", "0", "--theta-f", "0"]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = wvtomo(&["selftest"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    assert!(!text.contains("FAIL "));
}
