//! CSV tables, record dumps and the run summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiments::SweepRow;
use crate::HarnessError;

pub const CSV_HEADER: [&str; 14] = [
    "theta_f",
    "re_wv_true",
    "im_wv_true",
    "re_wv_extracted",
    "im_wv_extracted",
    "re_stderr",
    "im_stderr",
    "fidelity",
    "acceptance",
    "variant",
    "status",
    "rho11_est",
    "re_rho12_est",
    "im_rho12_est",
];

/// 17 significant digits.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_bytes(rows: &[SweepRow]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(io_error)?;
    for r in rows {
        let n = [
            r.theta_f,
            r.re_wv_true,
            r.im_wv_true,
            r.re_wv_extracted,
            r.im_wv_extracted,
            r.re_stderr,
            r.im_stderr,
            r.fidelity,
            r.acceptance,
        ]
        .map(number);
        let tail = [r.rho11_est, r.re_rho12_est, r.im_rho12_est].map(number);
        let record = n
            .iter()
            .map(String::as_str)
            .chain([r.variant.as_str(), r.status.as_str()])
            .chain(tail.iter().map(String::as_str));
        w.write_record(record).map_err(io_error)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))
}

pub fn write_csv(dir: &Path, file_name: &str, rows: &[SweepRow]) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir).map_err(io_error)?;
    let path = dir.join(file_name);
    fs::write(&path, csv_bytes(rows)?).map_err(io_error)?;
    Ok(path)
}

fn io_error(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(e.to_string())
}

/// `git describe` of the build, else the package version.
pub fn version() -> &'static str {
    option_env!("WVTOMO_GIT_DESCRIBE").unwrap_or(concat!("v", env!("CARGO_PKG_VERSION")))
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub master_seed: u64,
    pub threads: usize,
    pub trajectories: u64,
    pub wall_time_s: f64,
    pub trajectories_per_s: f64,
    pub outputs: Vec<String>,
    pub failed_rows: usize,
    pub config: &'a ExperimentConfig,
}

pub fn write_summary(dir: &Path, summary: &Summary<'_>) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir).map_err(io_error)?;
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(summary).map_err(io_error)?;
    fs::write(&path, text + "\n").map_err(io_error)?;
    Ok(path)
}
