//! The sweeps behind each figure.

use std::f64::consts::PI;

use wvtomo_core::{
    extract_weak_value, fidelity, integrated_factors, mc_pps, post_selection_overlap, reconstruct, trajectory_seed,
    true_weak_value, ExtractionMethod, ExtractionOptions, FactorMode, IntegratedFactors, PhaseData,
};

use crate::config::{Angle, ExperimentConfig, ExtractionName, FieldModel, MeasurementTime};
use crate::ensemble::{run_ensemble, Ensemble};
use crate::HarnessError;

/// One post-selection point of one analysis variant.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta_f: f64,
    pub re_wv_true: f64,
    pub im_wv_true: f64,
    pub re_wv_extracted: f64,
    pub im_wv_extracted: f64,
    pub re_stderr: f64,
    pub im_stderr: f64,
    pub fidelity: f64,
    pub acceptance: f64,
    pub variant: String,
    /// `ok`, or `error: ...` for a row whose analysis failed.
    pub status: String,
    pub rho11_est: f64,
    pub re_rho12_est: f64,
    pub im_rho12_est: f64,
    /// `|<psi_f|psi_i>|^2`, not written to CSV.
    pub overlap_sq: f64,
}

impl SweepRow {
    fn failed(theta_f: f64, variant: &str, reason: String) -> Self {
        Self {
            theta_f,
            re_wv_true: f64::NAN,
            im_wv_true: f64::NAN,
            re_wv_extracted: f64::NAN,
            im_wv_extracted: f64::NAN,
            re_stderr: f64::NAN,
            im_stderr: f64::NAN,
            fidelity: f64::NAN,
            acceptance: f64::NAN,
            variant: variant.to_string(),
            status: format!("error: {reason}"),
            rho11_est: f64::NAN,
            re_rho12_est: f64::NAN,
            im_rho12_est: f64::NAN,
            overlap_sq: f64::NAN,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Largest deviation from truth over the two components, in stderr units.
    pub fn max_z(&self) -> f64 {
        let re = (self.re_wv_extracted - self.re_wv_true).abs() / self.re_stderr;
        let im = (self.im_wv_extracted - self.im_wv_true).abs() / self.im_stderr;
        re.max(im)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file_name: &'static str,
    pub rows: Vec<SweepRow>,
}

/// Independent random streams per simulated ensemble family.
pub mod stream {
    pub const SWEEP: u64 = 0;
    pub const SHORT_TIME: u64 = 1;
    pub const LONG_TIME: u64 = 2;
    pub const IDEAL: u64 = 3;
    pub const LOSSY: u64 = 4;
    pub const BEYOND_LIMITS: u64 = 5;
}

/// Seed of the ensemble at phase index `k` in stream `s`.
pub fn ensemble_seed(master: u64, s: u64, k: usize) -> u64 {
    trajectory_seed(master, (s << 8) | k as u64)
}

/// Ensembles at the two configured phases.
pub fn simulate(cfg: &ExperimentConfig, eta: f64, s: u64) -> Result<[Ensemble; 2], HarnessError> {
    let psi_i = cfg.psi_i()?;
    let run = |k: usize| {
        let params = cfg.readout_params(eta, cfg.phases[k].0)?;
        run_ensemble(&psi_i, &params, cfg.field_model(), cfg.n_trajectories, ensemble_seed(cfg.master_seed, s, k))
    };
    Ok([run(0)?, run(1)?])
}

pub fn extraction_options(method: ExtractionName) -> ExtractionOptions {
    match method {
        ExtractionName::Linear => ExtractionOptions::linear(),
        ExtractionName::Iterative => ExtractionOptions {
            method: ExtractionMethod::Iterative,
            ..ExtractionOptions::default()
        },
    }
}

/// Sweep rows for one analysis of fixed ensembles.
pub fn analyze(
    cfg: &ExperimentConfig,
    ensembles: &[Ensemble; 2],
    mode: FactorMode,
    method: ExtractionName,
    variant: &str,
) -> Result<Vec<SweepRow>, HarnessError> {
    // The simulated evolution carries the time-resolved phase whatever the
    // analysis assumes.
    let truth_phi1 = integrated_factors(&ensembles[0].fields, &ensembles[0].params, FactorMode::TimeResolved).phi1;
    let factors: [IntegratedFactors; 2] = [0, 1].map(|k| integrated_factors(&ensembles[k].fields, &ensembles[k].params, mode));
    let opts = extraction_options(method);
    let rows = cfg
        .post_selection_sweep
        .iter()
        .map(|&Angle(theta_f)| {
            row(cfg, ensembles, &factors, truth_phi1, theta_f, &opts, variant)
                .unwrap_or_else(|e| SweepRow::failed(theta_f, variant, e.to_string()))
        })
        .collect();
    Ok(rows)
}

fn row(
    cfg: &ExperimentConfig,
    ensembles: &[Ensemble; 2],
    factors: &[IntegratedFactors; 2],
    truth_phi1: f64,
    theta_f: f64,
    opts: &ExtractionOptions,
    variant: &str,
) -> Result<SweepRow, HarnessError> {
    let psi_i = cfg.psi_i()?;
    let psi_f = cfg.psi_f(theta_f)?;
    let truth = true_weak_value(&psi_i, &psi_f, truth_phi1)?;
    let mut data = [0, 1].map(|k| PhaseData {
        pps_average: 0.0,
        pps_stderr: 0.0,
        factors: factors[k],
    });
    let mut acceptance = 0.0;
    for k in 0..2 {
        let pps = mc_pps(&ensembles[k].outcomes, &psi_f, cfg.pps_mode())?;
        data[k].pps_average = pps.average;
        data[k].pps_stderr = pps.stderr;
        acceptance += pps.acceptance / 2.0;
    }
    let extracted = extract_weak_value(&data, opts)?;
    let estimate = reconstruct(extracted.value, &psi_f, factors[0].phi1)?.density();
    Ok(SweepRow {
        theta_f,
        re_wv_true: truth.re,
        im_wv_true: truth.im,
        re_wv_extracted: extracted.value.re,
        im_wv_extracted: extracted.value.im,
        re_stderr: extracted.stderr.re,
        im_stderr: extracted.stderr.im,
        fidelity: fidelity(&psi_i.density(), &estimate),
        acceptance,
        variant: variant.to_string(),
        status: "ok".into(),
        rho11_est: estimate.rho11(),
        re_rho12_est: estimate.rho12().re,
        im_rho12_est: estimate.rho12().im,
        overlap_sq: post_selection_overlap(&psi_i, &psi_f, truth_phi1).powi(2),
    })
}

/// Short (`0.05/Gamma_d`) and long (`0.5/Gamma_d`) measurements, each
/// analysed with linear and iterative extraction.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<Vec<Table>, HarnessError> {
    let runs = [
        ("fig1_tm005.csv", 0.05, stream::SHORT_TIME),
        ("fig1_tm05.csv", 0.5, stream::LONG_TIME),
    ];
    let mut tables = Vec::new();
    for (file_name, per_gamma_d, s) in runs {
        let mut c = cfg.clone();
        c.readout.t_m = MeasurementTime::Relative { per_gamma_d };
        let ens = simulate(&c, c.eta, s)?;
        let mode = c.mode.factor_mode();
        let mut rows = analyze(&c, &ens, mode, ExtractionName::Linear, "linear")?;
        rows.extend(analyze(&c, &ens, mode, ExtractionName::Iterative, "iterative")?);
        tables.push(Table { file_name, rows });
    }
    Ok(tables)
}

/// Ideal and `eta = 0.8` detection on independent ensembles.
pub fn run_fig2_fig3(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let mut rows = Vec::new();
    for (eta, s, variant) in [(1.0, stream::IDEAL, "eta=1.0"), (0.8, stream::LOSSY, "eta=0.8")] {
        let ens = simulate(cfg, eta, s)?;
        rows.extend(analyze(cfg, &ens, cfg.mode.factor_mode(), cfg.extraction, variant)?);
    }
    Ok(rows)
}

/// Density-matrix estimates at `theta_f = 0.65 pi` for both efficiencies.
pub fn run_fig4(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let c = ExperimentConfig {
        post_selection_sweep: vec![Angle(0.65 * PI)],
        ..cfg.clone()
    };
    run_fig2_fig3(&c)
}

/// Both factor modes on the same ensembles; transient fields unless the
/// config names a field model.
pub fn run_fig5(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let mut c = cfg.clone();
    c.field_model.get_or_insert(FieldModel::Transient);
    let ens = simulate(&c, c.eta, stream::BEYOND_LIMITS)?;
    let mut rows = analyze(&c, &ens, FactorMode::Stationary, c.extraction, "stationary")?;
    rows.extend(analyze(&c, &ens, FactorMode::TimeResolved, c.extraction, "time_resolved")?);
    Ok(rows)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<(Vec<SweepRow>, [Ensemble; 2]), HarnessError> {
    let ens = simulate(cfg, cfg.eta, stream::SWEEP)?;
    let rows = analyze(cfg, &ens, cfg.mode.factor_mode(), cfg.extraction, cfg.mode.label())?;
    Ok((rows, ens))
}
