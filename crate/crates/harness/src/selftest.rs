//! Fast self-consistency checks runnable from the command line.

use std::f64::consts::PI;

use num_complex::Complex;
use wvtomo_core::*;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn paper(relative_phase: f64, t_factor: f64) -> (ReadoutParams, CavityFieldTrajectory) {
    let mut p = ReadoutParams::new(1.0, 8.0, 0.1, 1.0, 1.0).with_relative_phase(relative_phase);
    let (a1, a2) = stationary_fields(&p);
    p.t_m = t_factor / rates_at(a1, a2, &p).gamma_d;
    p.dt = p.t_m / 200.0;
    p.omega_q = p.dressed_frame_omega_q();
    let traj = stationary_trajectory(&p).expect("valid paper parameters");
    (p, traj)
}

fn reference() -> PureQubitState {
    pure_from_angles(BlochAngles::new(PI / 3.0, 0.662).expect("valid angles"))
}

pub fn run() -> Vec<Check> {
    let mut out = Vec::new();
    let psi = reference();

    let rho = psi.density();
    out.push(check(
        "reference state density",
        (rho.rho11() - 0.75).abs() < 1e-12 && (rho.rho12() - Complex::new(0.3415, 0.2661)).norm() < 2e-4,
        format!("rho11={:.6} rho12={:.5}", rho.rho11(), rho.rho12()),
    ));

    let (p, _) = paper(0.0, 0.5);
    let (a1, a2) = stationary_fields(&p);
    let r = rates_at(a1, a2, &p);
    out.push(check(
        "Gamma_m = Gamma_d at resonance",
        (r.gamma_m - r.gamma_d).abs() < 1e-10,
        format!("Gamma_m={:.6e} Gamma_d={:.6e}", r.gamma_m, r.gamma_d),
    ));

    let mut full = p;
    full.coherence_decay = CoherenceDecay::FullRate;
    full.t_m = 0.5 / r.gamma_d;
    let traj = stationary_trajectory(&full).expect("valid");
    let g = integrated_factors(&traj, &full, FactorMode::Stationary).g_factor;
    out.push(check(
        "G factor at Gamma_d t_m = 0.5 (full rate)",
        (g - 0.19673).abs() < 1e-5,
        format!("G={g:.6}"),
    ));

    let psi_f = pure_from_angles(BlochAngles::polar(0.65 * PI).expect("valid"));
    let sw = true_weak_value(&psi, &psi_f, 0.0).expect("overlapping");
    let back = reconstruct(sw, &psi_f, 0.0).expect("both components");
    out.push(check(
        "reconstruction round trip",
        (back.c1() - psi.canonical().c1()).norm() < 1e-10 && (back.c2() - psi.canonical().c2()).norm() < 1e-10,
        format!("sigma_w={sw:.4}"),
    ));

    let (p0, t0) = paper(0.0, 0.5);
    let (p1, t1) = paper(PI / 4.0, 0.5);
    let f = [integrated_factors(&t0, &p0, FactorMode::Stationary), integrated_factors(&t1, &p1, FactorMode::Stationary)];
    let data = f.map(|factors| PhaseData {
        pps_average: analytic_pps(sw, &factors),
        pps_stderr: 0.0,
        factors,
    });
    let ex = extract_weak_value(&data, &ExtractionOptions::default());
    out.push(check(
        "iterative extraction on noiseless averages",
        ex.as_ref().is_ok_and(|e| (e.value - sw).norm() < 1e-9),
        format!("{:?}", ex.map(|e| e.value)),
    ));

    let sim = Simulator::new(&PureQubitState::one(), &t0, &p0).expect("valid");
    let (x, state) = sim.run_with(|| 0.0, |_| {}).expect("finite");
    out.push(check(
        "noiseless |1> record sits at -sqrt(Gamma_ci)",
        (x + r.gamma_ci.sqrt()).abs() < 1e-12 && state.rho11() == 1.0,
        format!("x={x:.6e}"),
    ));

    let sim = Simulator::new(&psi, &t0, &p0).expect("valid");
    let purity = (0..200)
        .map(|j| sim.run(trajectory_seed(1, j)).map(|o| o.rho.purity()))
        .collect::<Result<Vec<_>>>();
    out.push(check(
        "ideal detection keeps trajectories pure",
        purity.as_ref().is_ok_and(|v| v.iter().all(|p| (p - 1.0).abs() < 1e-6)),
        "200 trajectories".into(),
    ));

    let n = 4000u64;
    let mean = (0..n)
        .map(|j| sim.run(trajectory_seed(2, j)).map(|o| o.rho.rho11()))
        .collect::<Result<Vec<_>>>()
        .map(|v| {
            let m = v.iter().sum::<f64>() / n as f64;
            let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            (m, sd / (n as f64).sqrt())
        });
    out.push(check(
        "conditioned populations are a martingale",
        mean.as_ref().is_ok_and(|(m, se)| (m - 0.75).abs() < 3.0 * se),
        format!("{mean:?}"),
    ));
    out
}
