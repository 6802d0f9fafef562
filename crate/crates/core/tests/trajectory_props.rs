use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;
use wvtomo_core::*;

fn paper(relative_phase: f64, t_factor: f64, eta: f64) -> (ReadoutParams, CavityFieldTrajectory) {
    let mut p = ReadoutParams::new(1.0, 8.0, 0.1, 1.0, 1.0).with_relative_phase(relative_phase);
    let (a1, a2) = stationary_fields(&p);
    p.t_m = t_factor / rates_at(a1, a2, &p).gamma_d;
    p.dt = p.t_m / 200.0;
    p.omega_q = p.dressed_frame_omega_q();
    p.eta = eta;
    let traj = stationary_trajectory(&p).unwrap();
    (p, traj)
}

fn psi_i() -> PureQubitState {
    pure_from_angles(BlochAngles::new(PI / 3.0, 0.662).unwrap())
}

fn close(a: &DensityMatrix, b: &DensityMatrix, tol: f64) -> bool {
    (a.rho11() - b.rho11()).abs() < tol && (a.rho12() - b.rho12()).norm() < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn update_composes_over_split_records(
        seed in any::<u64>(), k in 1usize..199, phase in 0.0f64..PI, theta in 0.1f64..3.0,
    ) {
        let (p, traj) = paper(phase, 0.5, 1.0);
        let (record, _) = simulate_record(&psi_i(), &traj, &p, seed).unwrap();
        let prior = pure_from_angles(BlochAngles::new(theta, 1.0).unwrap()).density();
        let whole = bayesian_update(&prior, &record, &traj, &p).unwrap();
        let (ra, rb) = record.split_at(k).unwrap();
        let (ta, tb) = traj.split_at(k).unwrap();
        let mid = bayesian_update(&prior, &ra, &ta, &p).unwrap();
        let two = bayesian_update(&mid, &rb, &tb, &p).unwrap();
        prop_assert!(close(&whole, &two, 1e-9));
    }

    #[test]
    fn simulator_state_matches_one_shot_update(seed in any::<u64>(), phase in 0.0f64..PI) {
        let (p, traj) = paper(phase, 0.5, 1.0);
        let (record, rho) = simulate_record(&psi_i(), &traj, &p, seed).unwrap();
        let direct = bayesian_update(&psi_i().density(), &record, &traj, &p).unwrap();
        prop_assert!(close(&rho, &direct, 1e-9));
    }

    #[test]
    fn conditioned_states_stay_physical(
        seed in any::<u64>(), phase in 0.0f64..PI, eta in 0.05f64..1.0,
    ) {
        let (p, traj) = paper(phase, 0.5, eta);
        let (_, rho) = simulate_record(&psi_i(), &traj, &p, seed).unwrap();
        prop_assert!(rho.is_valid());
        prop_assert!(rho.purity() <= 1.0 + 1e-12);
    }

    #[test]
    fn ideal_detection_preserves_purity(seed in any::<u64>(), phase in 0.0f64..PI) {
        let (p, traj) = paper(phase, 0.5, 1.0);
        let (_, rho) = simulate_record(&psi_i(), &traj, &p, seed).unwrap();
        prop_assert!((rho.purity() - 1.0).abs() < 1e-6);
    }
}

/// Averaged over records the conditioned state is the unconditioned one:
/// populations are conserved and coherence decays as `exp(-Gamma_d t / 2)`.
#[test]
fn ensemble_average_is_unconditioned_evolution() {
    let n = 4000;
    for (phase, eta) in [(0.0, 1.0), (PI / 4.0, 0.8), (PI / 2.0, 0.5)] {
        let (p, traj) = paper(phase, 0.5, eta);
        let sim = Simulator::new(&psi_i(), &traj, &p).unwrap();
        let states: Vec<DensityMatrix> = (0..n).map(|j| sim.run(trajectory_seed(17, j)).unwrap().rho).collect();
        let nf = n as f64;
        let mean11 = states.iter().map(|r| r.rho11()).sum::<f64>() / nf;
        let sd11 = (states.iter().map(|r| (r.rho11() - mean11).powi(2)).sum::<f64>() / nf).sqrt();
        assert!((mean11 - 0.75).abs() <= 4.0 * sd11 / nf.sqrt() + 1e-12, "{mean11}");

        let mean12 = states.iter().map(|r| r.rho12()).sum::<Complex<f64>>() / nf;
        let sd12 = (states.iter().map(|r| (r.rho12() - mean12).norm_sqr()).sum::<f64>() / nf).sqrt();
        let expect = psi_i().density().rho12() * (-0.25f64).exp();
        assert!((mean12 - expect).norm() < 4.0 * sd12 / nf.sqrt(), "{mean12} vs {expect}");
    }
}

#[test]
fn postselected_average_follows_closed_form() {
    let n = 20_000;
    let (p, traj) = paper(PI / 4.0, 0.5, 1.0);
    let sim = Simulator::new(&psi_i(), &traj, &p).unwrap();
    let outcomes: Vec<TrajectoryOutcome> = (0..n).map(|j| sim.run(trajectory_seed(5, j)).unwrap()).collect();
    let factors = integrated_factors(&traj, &p, FactorMode::Stationary);
    for theta_f in [0.2, 0.5, 0.65, 0.8] {
        let psi_f = pure_from_angles(BlochAngles::polar(theta_f * PI).unwrap());
        let sw = true_weak_value(&psi_i(), &psi_f, factors.phi1).unwrap();
        let mc = mc_pps(&outcomes, &psi_f, PpsMode::Weighted).unwrap();
        let expect = analytic_pps(sw, &factors);
        assert!((mc.average - expect).abs() < 4.0 * mc.stderr, "{theta_f}: {} vs {expect}", mc.average);
    }
}

#[test]
fn record_dump_is_stable_format() {
    let (p, traj) = paper(0.0, 0.05, 1.0);
    let (record, _) = simulate_record(&psi_i(), &traj, &p, 1).unwrap();
    let dir = std::env::temp_dir().join(format!("wvtomo-record-{}", std::process::id()));
    std::fs::write(&dir, {
        let mut buf = Vec::new();
        record.write_to(&mut buf).unwrap();
        buf
    })
    .unwrap();
    let bytes = std::fs::read(&dir).unwrap();
    std::fs::remove_file(&dir).ok();
    assert_eq!(u32::from_le_bytes(bytes[0..4].try_into().unwrap()), 200);
    assert_eq!(f64::from_le_bytes(bytes[4..12].try_into().unwrap()), record.dt());
    assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 1);
    let first = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    assert_eq!(first, record.samples()[0]);
}
