//! Qubit-conditioned cavity fields and the measurement rates they induce.
//!
//! Field `alpha1` goes with qubit state `|1>` (cavity pulled by `+chi`),
//! `alpha2` with `|2>`. Everything downstream is expressed through
//! `beta = alpha2 - alpha1` and the product `alpha1 * conj(alpha2)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// How the detector efficiency enters the generator and the PPS prefactors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EfficiencyModel {
    /// Rates seen by the detector are `eta * Gamma`.
    #[default]
    RetainedFraction,
    /// Rates seen by the detector are `(1 - eta) * Gamma`.
    LostFraction,
}

/// Exponent applied to accumulated decoherence in `epsilon_2`, `G` and the
/// inefficiency factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoherenceDecay {
    /// `exp(-int Gamma dt / 2)`: the decay the Bayesian update produces on
    /// ensemble coherences.
    #[default]
    HalfRate,
    /// `exp(-int Gamma dt)`.
    FullRate,
    /// `exp(-int sqrt(Gamma) dt)` for the time-resolved factors.
    SqrtRate,
}

/// Which cavity fields feed the PPS prefactors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorMode {
    /// Rates from the stationary fields held for the whole window.
    #[default]
    Stationary,
    /// Time integrals over the actual field trajectory.
    TimeResolved,
}

/// Drive, cavity and detection parameters. `epsilon_m` sets the unit scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutParams<T: Real = f64> {
    pub epsilon_m: T,
    pub kappa: T,
    pub chi: T,
    pub delta_r: T,
    pub omega_q: T,
    /// Absolute local-oscillator phase. Use [`ReadoutParams::with_relative_phase`]
    /// to set it relative to the stationary `theta_beta`.
    pub phi_lo: T,
    pub t_m: T,
    /// Requested step; the grid uses `t_m / ceil(t_m / dt)`.
    pub dt: T,
    pub eta: T,
    pub efficiency_model: EfficiencyModel,
    pub coherence_decay: CoherenceDecay,
}

impl<T: Real> ReadoutParams<T> {
    /// Resonant drive, unit efficiency, `omega_q = 0`, `phi_lo = 0`.
    pub fn new(epsilon_m: T, kappa: T, chi: T, t_m: T, dt: T) -> Self {
        Self {
            epsilon_m,
            kappa,
            chi,
            delta_r: T::zero(),
            omega_q: T::zero(),
            phi_lo: T::zero(),
            t_m,
            dt,
            eta: T::one(),
            efficiency_model: EfficiencyModel::default(),
            coherence_decay: CoherenceDecay::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("epsilon_m", self.epsilon_m),
            ("kappa", self.kappa),
            ("chi", self.chi),
            ("delta_r", self.delta_r),
            ("omega_q", self.omega_q),
            ("phi_lo", self.phi_lo),
            ("t_m", self.t_m),
            ("dt", self.dt),
            ("eta", self.eta),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParams {
                    name,
                    reason: "not finite".into(),
                });
            }
        }
        let bad = |name, reason: &str| {
            Err(Error::InvalidParams {
                name,
                reason: reason.to_string(),
            })
        };
        if self.kappa <= T::zero() {
            return bad("kappa", "must be > 0");
        }
        if self.t_m <= T::zero() {
            return bad("t_m", "must be > 0");
        }
        if self.dt <= T::zero() || self.dt > self.t_m {
            return bad("dt", "must satisfy 0 < dt <= t_m");
        }
        if self.eta <= T::zero() || self.eta > T::one() {
            return bad("eta", "must satisfy 0 < eta <= 1");
        }
        Ok(())
    }

    /// Number of integration steps covering `[0, t_m]`.
    pub fn n_steps(&self) -> usize {
        let ratio = (self.t_m / self.dt).to_f64().unwrap_or(1.0);
        ((ratio - 1e-9).ceil() as usize).max(1)
    }

    /// Effective step, `t_m / n_steps`.
    pub fn step(&self) -> T {
        self.t_m / T::from_usize(self.n_steps()).expect("step count fits scalar")
    }

    /// Multiplier applied to `Gamma_ci` and `Gamma_ba` on the detector side.
    pub fn detection_scale(&self) -> T {
        match self.efficiency_model {
            EfficiencyModel::RetainedFraction => self.eta,
            EfficiencyModel::LostFraction => T::one() - self.eta,
        }
    }

    pub fn stationary_theta_beta(&self) -> T {
        let (a1, a2) = stationary_fields(self);
        beta_angle(a2 - a1)
    }

    /// Same parameters with `phi_lo = theta_beta + relative`.
    pub fn with_relative_phase(&self, relative: T) -> Self {
        Self {
            phi_lo: self.stationary_theta_beta() + relative,
            ..*self
        }
    }

    /// Bare frequency that makes the stationary `Omega_q = omega_q + chi + B`
    /// vanish: the frame co-rotating with the dressed qubit.
    pub fn dressed_frame_omega_q(&self) -> T {
        let (a1, a2) = stationary_fields(self);
        let b = stark_shift(a1, a2, self.chi);
        -(self.chi + b)
    }

    /// `exp(-k * integral)` for the configured convention. `sqrt_integral`
    /// is only consulted for [`CoherenceDecay::SqrtRate`].
    pub fn decay_factor(&self, integral: T, sqrt_integral: T) -> T {
        match self.coherence_decay {
            CoherenceDecay::HalfRate => (-integral / T::lit(2.0)).exp(),
            CoherenceDecay::FullRate => (-integral).exp(),
            CoherenceDecay::SqrtRate => (-sqrt_integral).exp(),
        }
    }

    /// Inefficiency factor on coherences for a given `int Gamma_m dt`.
    pub fn inefficiency_factor(&self, measurement_integral: T) -> T {
        let lost = (T::one() - self.eta) * measurement_integral;
        match self.coherence_decay {
            CoherenceDecay::HalfRate => (-lost / T::lit(2.0)).exp(),
            CoherenceDecay::FullRate | CoherenceDecay::SqrtRate => (-lost).exp(),
        }
    }
}

fn beta_angle<T: Real>(beta: Complex<T>) -> T {
    if beta.norm() == T::zero() {
        T::zero()
    } else {
        beta.arg()
    }
}

fn stark_shift<T: Real>(a1: Complex<T>, a2: Complex<T>, chi: T) -> T {
    T::lit(2.0) * chi * (a1 * a2.conj()).re
}

/// Relaxation rate `kappa/2 - i(delta_r +- chi)` of field `index` (1 or 2).
fn relaxation<T: Real>(params: &ReadoutParams<T>, index: u8) -> Complex<T> {
    let detuning = if index == 1 {
        params.delta_r + params.chi
    } else {
        params.delta_r - params.chi
    };
    Complex::new(params.kappa / T::lit(2.0), -detuning)
}

/// `alpha_{1(2)} = -i eps / [-i(delta_r +- chi) + kappa/2]`.
pub fn stationary_fields<T: Real>(params: &ReadoutParams<T>) -> (Complex<T>, Complex<T>) {
    let drive = Complex::new(T::zero(), -params.epsilon_m);
    (drive / relaxation(params, 1), drive / relaxation(params, 2))
}

/// Fields sampled on `t_k = k dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityFieldTrajectory<T: Real = f64> {
    dt: T,
    alpha1: Vec<Complex<T>>,
    alpha2: Vec<Complex<T>>,
}

impl<T: Real> CavityFieldTrajectory<T> {
    pub fn from_samples(dt: T, alpha1: Vec<Complex<T>>, alpha2: Vec<Complex<T>>) -> Result<Self> {
        if alpha1.len() != alpha2.len() || alpha1.len() < 2 {
            return Err(Error::GridMismatch(format!(
                "field sample counts {} and {} (need equal, >= 2)",
                alpha1.len(),
                alpha2.len()
            )));
        }
        if dt.is_nan() || dt <= T::zero() {
            return Err(Error::InvalidParams {
                name: "dt",
                reason: "must be > 0".into(),
            });
        }
        Ok(Self { dt, alpha1, alpha2 })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.alpha1.len() - 1
    }

    pub fn t_m(&self) -> T {
        self.dt * T::from_usize(self.n_steps()).expect("step count fits scalar")
    }

    pub fn time(&self, k: usize) -> T {
        self.dt * T::from_usize(k).expect("index fits scalar")
    }

    pub fn alpha1(&self) -> &[Complex<T>] {
        &self.alpha1
    }

    pub fn alpha2(&self) -> &[Complex<T>] {
        &self.alpha2
    }

    /// Splits at sample `k`; both halves contain sample `k`.
    pub fn split_at(&self, k: usize) -> Result<(Self, Self)> {
        if k == 0 || k >= self.n_steps() {
            return Err(Error::GridMismatch(format!(
                "split index {k} must be interior to 0..{}",
                self.n_steps()
            )));
        }
        let head = Self {
            dt: self.dt,
            alpha1: self.alpha1[..=k].to_vec(),
            alpha2: self.alpha2[..=k].to_vec(),
        };
        let tail = Self {
            dt: self.dt,
            alpha1: self.alpha1[k..].to_vec(),
            alpha2: self.alpha2[k..].to_vec(),
        };
        Ok((head, tail))
    }
}

/// Stationary fields held over the whole grid (bad-cavity description).
pub fn stationary_trajectory<T: Real>(params: &ReadoutParams<T>) -> Result<CavityFieldTrajectory<T>> {
    params.validate()?;
    let n = params.n_steps();
    let (a1, a2) = stationary_fields(params);
    CavityFieldTrajectory::from_samples(params.step(), vec![a1; n + 1], vec![a2; n + 1])
}

/// Vacuum-start fields `alpha_j(t) = alpha_j_bar (1 - exp(-lambda_j t))`,
/// the exact solution of `d alpha_j/dt = -i eps - lambda_j alpha_j`.
pub fn transient_fields<T: Real>(params: &ReadoutParams<T>) -> Result<CavityFieldTrajectory<T>> {
    params.validate()?;
    let dt = params.step();
    let kick = params.kappa * dt;
    let limit = 0.05;
    if kick > T::lit(limit * (1.0 + 1e-9)) {
        return Err(Error::StepTooCoarse {
            quantity: "kappa * dt",
            value: kick.to_f64().unwrap_or(f64::NAN),
            limit,
        });
    }
    let (bar1, bar2) = stationary_fields(params);
    let (l1, l2) = (relaxation(params, 1), relaxation(params, 2));
    let n = params.n_steps();
    let one = Complex::new(T::one(), T::zero());
    let field = |bar: Complex<T>, lambda: Complex<T>, k: usize| {
        let t = dt * T::from_usize(k).expect("index fits scalar");
        bar * (one - (-lambda * t).exp())
    };
    let alpha1 = (0..=n).map(|k| field(bar1, l1, k)).collect();
    let alpha2 = (0..=n).map(|k| field(bar2, l2, k)).collect();
    CavityFieldTrajectory::from_samples(dt, alpha1, alpha2)
}

/// Instantaneous rates for one pair of fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet<T: Real = f64> {
    pub gamma_ci: T,
    pub gamma_ba: T,
    pub gamma_m: T,
    pub gamma_d: T,
    pub stark_b: T,
    pub theta_beta: T,
    pub omega_tilde: T,
}

pub fn rates_at<T: Real>(alpha1: Complex<T>, alpha2: Complex<T>, params: &ReadoutParams<T>) -> RateSet<T> {
    let beta = alpha2 - alpha1;
    let theta_beta = beta_angle(beta);
    let strength = params.kappa * beta.norm_sqr();
    let angle = params.phi_lo - theta_beta;
    let (s, c) = angle.sin_cos();
    let gamma_ci = strength * c * c;
    let gamma_ba = strength * s * s;
    let cross = alpha1 * alpha2.conj();
    let stark_b = T::lit(2.0) * params.chi * cross.re;
    RateSet {
        gamma_ci,
        gamma_ba,
        gamma_m: gamma_ci + gamma_ba,
        gamma_d: T::lit(4.0) * params.chi * cross.im,
        stark_b,
        theta_beta,
        omega_tilde: params.omega_q + params.chi + stark_b,
    }
}

/// Rates for one integration step, trapezoid-averaged over its endpoints.
/// `sqrt_ci` and `sqrt_ba` are raw (not efficiency-scaled).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRates<T: Real = f64> {
    pub sqrt_ci: T,
    pub sqrt_ba: T,
    pub sqrt_d: T,
    pub gamma_d: T,
    pub gamma_m: T,
    pub omega_tilde: T,
}

/// Per-step discretization shared by the generator, the Bayesian update and
/// the time-resolved factors, so all three integrate identically.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSchedule<T: Real = f64> {
    dt: T,
    steps: Vec<StepRates<T>>,
}

impl<T: Real> RateSchedule<T> {
    pub fn from_trajectory(traj: &CavityFieldTrajectory<T>, params: &ReadoutParams<T>) -> Self {
        let half = T::lit(0.5);
        let samples: Vec<RateSet<T>> = traj
            .alpha1()
            .iter()
            .zip(traj.alpha2())
            .map(|(&a1, &a2)| rates_at(a1, a2, params))
            .collect();
        let steps = samples
            .windows(2)
            .map(|w| {
                let (l, r) = (&w[0], &w[1]);
                let mid = |f: fn(&RateSet<T>) -> T| half * (f(l) + f(r));
                StepRates {
                    sqrt_ci: mid(|s| s.gamma_ci.max(T::zero()).sqrt()),
                    sqrt_ba: mid(|s| s.gamma_ba.max(T::zero()).sqrt()),
                    sqrt_d: mid(|s| s.gamma_d.max(T::zero()).sqrt()),
                    gamma_d: mid(|s| s.gamma_d),
                    gamma_m: mid(|s| s.gamma_m),
                    omega_tilde: mid(|s| s.omega_tilde),
                }
            })
            .collect();
        Self { dt: traj.dt(), steps }
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn steps(&self) -> &[StepRates<T>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn t_m(&self) -> T {
        self.dt * T::from_usize(self.steps.len()).expect("step count fits scalar")
    }

    fn integral(&self, f: impl Fn(&StepRates<T>) -> T) -> T {
        self.steps.iter().map(f).sum::<T>() * self.dt
    }

    pub fn measurement_integral(&self) -> T {
        self.integral(|s| s.gamma_m)
    }

    pub fn max_gamma_m(&self) -> T {
        self.steps
            .iter()
            .map(|s| s.gamma_m)
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Prefactors of the closed-form PPS average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratedFactors<T: Real = f64> {
    pub eps1: T,
    pub eps2: T,
    pub g_factor: T,
    pub phi1: T,
    /// `int Gamma_d dt`.
    pub decoherence_integral: T,
    /// `int Gamma_m dt`, needed by the inefficiency factor.
    pub measurement_integral: T,
}

/// Both modes share the outcome convention `x = (1/t_m) int I dt`, so the
/// time-resolved current integrals are divided by `t_m`.
pub fn integrated_factors<T: Real>(
    traj: &CavityFieldTrajectory<T>,
    params: &ReadoutParams<T>,
    mode: FactorMode,
) -> IntegratedFactors<T> {
    let scale = params.detection_scale().sqrt();
    let half = T::lit(0.5);
    match mode {
        FactorMode::Stationary => {
            let (a1, a2) = stationary_fields(params);
            let r = rates_at(a1, a2, params);
            let t_m = traj.t_m();
            let gd_int = r.gamma_d * t_m;
            let decay = params.decay_factor(gd_int, r.gamma_d.max(T::zero()).sqrt() * t_m);
            IntegratedFactors {
                eps1: scale * r.gamma_ci.sqrt(),
                eps2: scale * r.gamma_ba.sqrt() * decay,
                g_factor: half * (T::one() - decay),
                phi1: r.omega_tilde * t_m,
                decoherence_integral: gd_int,
                measurement_integral: r.gamma_m * t_m,
            }
        }
        FactorMode::TimeResolved => {
            let schedule = RateSchedule::from_trajectory(traj, params);
            let t_m = schedule.t_m();
            let gd_int = schedule.integral(|s| s.gamma_d);
            let decay = params.decay_factor(gd_int, schedule.integral(|s| s.sqrt_d));
            IntegratedFactors {
                eps1: scale * schedule.integral(|s| s.sqrt_ci) / t_m,
                eps2: scale * schedule.integral(|s| s.sqrt_ba) / t_m * decay,
                g_factor: half * (T::one() - decay),
                phi1: schedule.integral(|s| s.omega_tilde),
                decoherence_integral: gd_int,
                measurement_integral: schedule.measurement_integral(),
            }
        }
    }
}
