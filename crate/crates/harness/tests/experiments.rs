use std::f64::consts::PI;

use wvtomo::config::{Angle, ExperimentConfig, FieldModel};
use wvtomo::experiments::{self, stream};
use wvtomo_core::FactorMode;

fn small(n: u64) -> ExperimentConfig {
    ExperimentConfig {
        n_trajectories: n,
        post_selection_sweep: vec![Angle(0.3 * PI), Angle(0.65 * PI)],
        ..ExperimentConfig::default()
    }
}

#[test]
fn factor_modes_agree_in_bad_cavity_limit() {
    let cfg = ExperimentConfig {
        field_model: Some(FieldModel::Transient),
        master_seed: 3,
        ..small(400)
    };
    let rows = experiments::run_fig5(&cfg).unwrap();
    let (stat, resolved) = rows.split_at(rows.len() / 2);
    for (a, b) in stat.iter().zip(resolved) {
        assert!(a.is_ok() && b.is_ok());
        assert!((a.re_wv_extracted - b.re_wv_extracted).abs() < a.re_stderr);
        assert!((a.im_wv_extracted - b.im_wv_extracted).abs() < a.im_stderr);
    }
}

#[test]
fn self_postselection_gives_real_weak_value() {
    // psi_f along psi_i (azimuth included) makes sigma_w = <sigma_z> real.
    let cfg = ExperimentConfig {
        post_selection_sweep: vec![Angle(PI / 3.0)],
        post_selection_phi: Angle(0.662),
        ..small(20_000)
    };
    let (rows, _) = experiments::run_sweep(&cfg).unwrap();
    let r = &rows[0];
    assert!(r.im_wv_true.abs() < 1e-12);
    assert!((r.re_wv_true - 0.5).abs() < 1e-12);
    assert!(r.im_wv_extracted.abs() < 3.0 * r.im_stderr);
}

#[test]
fn rows_reproducible_from_seed() {
    let cfg = small(1000);
    let a = experiments::run_sweep(&cfg).unwrap().0;
    let b = experiments::run_sweep(&cfg).unwrap().0;
    assert_eq!(a, b);
    let other = ExperimentConfig { master_seed: 1, ..cfg };
    assert_ne!(a, experiments::run_sweep(&other).unwrap().0);
}

#[test]
fn ensembles_independent_across_streams() {
    let cfg = small(50);
    let a = experiments::simulate(&cfg, 1.0, stream::IDEAL).unwrap();
    let b = experiments::simulate(&cfg, 1.0, stream::LOSSY).unwrap();
    assert_ne!(a[0].outcomes[0].x, b[0].outcomes[0].x);
    assert_ne!(a[0].seed, a[1].seed);
}

#[test]
fn stationary_and_time_resolved_match_for_constant_fields() {
    let cfg = small(2000);
    let ens = experiments::simulate(&cfg, 1.0, stream::SWEEP).unwrap();
    let a = experiments::analyze(&cfg, &ens, FactorMode::Stationary, cfg.extraction, "x").unwrap();
    let b = experiments::analyze(&cfg, &ens, FactorMode::TimeResolved, cfg.extraction, "x").unwrap();
    for (a, b) in a.iter().zip(&b) {
        assert!((a.re_wv_extracted - b.re_wv_extracted).abs() < 1e-9);
        assert!((a.im_wv_extracted - b.im_wv_extracted).abs() < 1e-9);
    }
}

#[test]
fn preset_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let paper = ExperimentConfig::load(&dir.join("paper.json")).unwrap();
    assert_eq!(paper, ExperimentConfig::default());
    let beyond = ExperimentConfig::load(&dir.join("beyond_limits.json")).unwrap();
    assert_eq!(beyond.readout.kappa, 2.0);
    assert_eq!(beyond.field_model, Some(FieldModel::Transient));
}
