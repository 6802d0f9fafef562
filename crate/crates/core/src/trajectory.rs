//! Homodyne records and the quantum Bayesian update they drive.
//!
//! For a record `I_k` on steps of length `dt`, define
//! `u = sum_k a_k I_k dt` with `a_k = sqrt(s Gamma_ci)`. The likelihoods of the
//! two qubit states are `P_{1,2} = C exp(-v -+ u)` with `C`, `v` shared by both,
//! so every quantity the update needs depends on the record only through `u`
//! and the back-action phase `Phi_2 = -sum_k b_k I_k dt`. Applying the update
//! step by step and in one shot are therefore the same computation.

use std::io::{Read, Write};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cavity::{CavityFieldTrajectory, RateSchedule, ReadoutParams, StepRates};
use crate::error::{Error, Result};
use crate::qubit::{DensityMatrix, PureQubitState};
use crate::scalar::Real;

/// Upper bound on `Gamma_m * dt` for the per-step update to be a weak kick.
pub const MAX_STEP_KICK: f64 = 0.05;

/// Discretized current `I(t_k)` with its time-averaged outcome `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord<T: Real = f64> {
    samples: Vec<T>,
    dt: T,
    x: T,
    seed: u64,
}

impl<T: Real> MeasurementRecord<T> {
    pub fn new(samples: Vec<T>, dt: T, seed: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::GridMismatch("empty record".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::RecordFormat("non-finite current sample".into()));
        }
        let x = average(&samples);
        Ok(Self {
            samples,
            dt,
            x,
            seed,
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// `x = (1/t_m) sum_k I_k dt`.
    pub fn x(&self) -> T {
        self.x
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t_m(&self) -> T {
        self.dt * T::from_usize(self.samples.len()).expect("length fits scalar")
    }

    /// Splits after `k` samples.
    pub fn split_at(&self, k: usize) -> Result<(Self, Self)> {
        if k == 0 || k >= self.samples.len() {
            return Err(Error::GridMismatch(format!(
                "split index {k} must be interior to 0..{}",
                self.samples.len()
            )));
        }
        let (a, b) = self.samples.split_at(k);
        Ok((
            Self::new(a.to_vec(), self.dt, self.seed)?,
            Self::new(b.to_vec(), self.dt, self.seed)?,
        ))
    }

    /// Little-endian dump: `u32` length, `f64` dt, `u64` seed, then samples.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let len = u32::try_from(self.samples.len())
            .map_err(|_| std::io::Error::other("record longer than u32::MAX"))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(&to_f64(self.dt).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for s in &self.samples {
            w.write_all(&to_f64(*s).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::RecordFormat(e.to_string());
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4).map_err(io)?;
        let len = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8).map_err(io)?;
        let dt = f64::from_le_bytes(b8);
        r.read_exact(&mut b8).map_err(io)?;
        let seed = u64::from_le_bytes(b8);
        let mut samples = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut b8).map_err(io)?;
            samples.push(T::lit(f64::from_le_bytes(b8)));
        }
        Self::new(samples, T::lit(dt), seed)
    }
}

fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

fn average<T: Real>(samples: &[T]) -> T {
    samples.iter().copied().sum::<T>() / T::from_usize(samples.len()).expect("length fits scalar")
}

/// Record-dependent factors of the Bayesian update.
///
/// `log_p1`, `log_p2` are log-likelihoods with the record-only factor
/// `exp(-sum I^2 dt / 2)` (common to both states) removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesianFactors<T: Real = f64> {
    pub log_p1: T,
    pub log_p2: T,
    pub d_factor: T,
    pub phi1: T,
    pub phi2: T,
}

impl<T: Real> BayesianFactors<T> {
    pub fn p1(&self) -> T {
        self.log_p1.exp()
    }

    pub fn p2(&self) -> T {
        self.log_p2.exp()
    }

    /// `u` such that `P1/P2 = exp(-2u)`.
    fn evidence(&self) -> T {
        (self.log_p2 - self.log_p1) / T::lit(2.0)
    }

    /// Applies the factors to a prior.
    pub fn apply(&self, rho0: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        posterior(rho0, self.evidence(), self.d_factor.ln(), self.phi1 + self.phi2)
    }
}

/// Posterior for evidence `u`, log purity factor and total phase.
fn posterior<T: Real>(rho0: &DensityMatrix<T>, u: T, log_d: T, phase: T) -> Result<DensityMatrix<T>> {
    let l1 = rho0.rho11().ln() - u;
    let l2 = rho0.rho22().ln() + u;
    let top = l1.max(l2);
    let log_norm = top + ((l1 - top).exp() + (l2 - top).exp()).ln();
    if !log_norm.is_finite() {
        return Err(Error::DegenerateLikelihood);
    }
    let rho11 = (l1 - log_norm).exp();
    let c0 = rho0.rho12();
    let rho12 = if c0.norm() == T::zero() {
        Complex::new(T::zero(), T::zero())
    } else {
        let magnitude = (c0.norm().ln() - log_norm + log_d).exp();
        Complex::from_polar(magnitude, c0.arg() - phase)
    };
    Ok(DensityMatrix::from_parts(rho11, rho12))
}

/// Accumulates the sufficient statistics of a record step by step.
#[derive(Debug, Clone, Copy)]
pub struct BayesianFilter<T: Real = f64> {
    prior: DensityMatrix<T>,
    log_odds0: T,
    scale: T,
    evidence: T,
    log_d: T,
    phi1: T,
    phi2: T,
}

impl<T: Real> BayesianFilter<T> {
    pub fn new(prior: DensityMatrix<T>, params: &ReadoutParams<T>) -> Self {
        Self {
            prior,
            log_odds0: prior.rho11().ln() - prior.rho22().ln(),
            scale: params.detection_scale().sqrt(),
            evidence: T::zero(),
            log_d: T::zero(),
            phi1: T::zero(),
            phi2: T::zero(),
        }
    }

    /// Conditioned `<sigma_z>` from the populations alone.
    #[inline]
    pub fn sigma_z(&self) -> T {
        (self.log_odds0 / T::lit(2.0) - self.evidence).tanh()
    }

    #[inline]
    pub fn step(&mut self, current: T, rates: &StepRates<T>, dt: T) {
        let a = self.scale * rates.sqrt_ci;
        let b = self.scale * rates.sqrt_ba;
        self.evidence = self.evidence + a * current * dt;
        self.phi2 = self.phi2 - b * current * dt;
        self.phi1 = self.phi1 + rates.omega_tilde * dt;
        self.log_d = self.log_d - (rates.gamma_d - rates.gamma_m) * dt / T::lit(2.0);
    }

    pub fn factors(&self) -> BayesianFactors<T> {
        BayesianFactors {
            log_p1: -self.evidence,
            log_p2: self.evidence,
            d_factor: self.log_d.exp(),
            phi1: self.phi1,
            phi2: self.phi2,
        }
    }

    /// Conditioned state so far (without the inefficiency factor).
    pub fn state(&self) -> Result<DensityMatrix<T>> {
        posterior(&self.prior, self.evidence, self.log_d, self.phi1 + self.phi2)
    }
}

fn check_grid<T: Real>(record: &MeasurementRecord<T>, traj: &CavityFieldTrajectory<T>) -> Result<()> {
    if record.samples().len() != traj.n_steps() {
        return Err(Error::GridMismatch(format!(
            "record has {} samples, trajectory {} steps",
            record.samples().len(),
            traj.n_steps()
        )));
    }
    let tol = T::lit(1e-9) * traj.dt();
    if (record.dt() - traj.dt()).abs() > tol {
        return Err(Error::GridMismatch("record and trajectory dt differ".into()));
    }
    Ok(())
}

pub fn bayesian_factors<T: Real>(
    record: &MeasurementRecord<T>,
    traj: &CavityFieldTrajectory<T>,
    params: &ReadoutParams<T>,
) -> Result<BayesianFactors<T>> {
    check_grid(record, traj)?;
    let schedule = RateSchedule::from_trajectory(traj, params);
    let mut filter = BayesianFilter::new(DensityMatrix::maximally_mixed(), params);
    for (i, rates) in record.samples().iter().zip(schedule.steps()) {
        filter.step(*i, rates, schedule.dt());
    }
    Ok(filter.factors())
}

/// One-shot update of `rho0` on a full record: populations by the likelihood
/// ratio, coherence by `sqrt(P1 P2)/N`, `D` and `exp(-i(Phi1 + Phi2))`.
/// Detector inefficiency is applied separately by [`apply_inefficiency`].
pub fn bayesian_update<T: Real>(
    rho0: &DensityMatrix<T>,
    record: &MeasurementRecord<T>,
    traj: &CavityFieldTrajectory<T>,
    params: &ReadoutParams<T>,
) -> Result<DensityMatrix<T>> {
    bayesian_factors(record, traj, params)?.apply(rho0)
}

/// Multiplies `rho12` by the lost-information factor for `int Gamma_m dt`.
pub fn apply_inefficiency<T: Real>(
    rho: &DensityMatrix<T>,
    measurement_integral: T,
    params: &ReadoutParams<T>,
) -> DensityMatrix<T> {
    rho.with_coherence(rho.rho12() * params.inefficiency_factor(measurement_integral))
}

/// Per-trajectory seed from the ensemble seed and trajectory index.
pub fn trajectory_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x6a09_e667_f3bc_c909)))
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Outcome and final conditioned state of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOutcome<T: Real = f64> {
    pub x: T,
    pub rho: DensityMatrix<T>,
}

impl<T: Real> From<(MeasurementRecord<T>, DensityMatrix<T>)> for TrajectoryOutcome<T> {
    fn from((record, rho): (MeasurementRecord<T>, DensityMatrix<T>)) -> Self {
        Self { x: record.x(), rho }
    }
}

/// Precomputed generator for many trajectories sharing `psi_i` and fields.
#[derive(Debug, Clone)]
pub struct Simulator<T: Real = f64> {
    prior: DensityMatrix<T>,
    params: ReadoutParams<T>,
    schedule: RateSchedule<T>,
    inefficiency: T,
    noise_scale: T,
}

impl<T: Real> Simulator<T> {
    pub fn new(
        psi_i: &PureQubitState<T>,
        traj: &CavityFieldTrajectory<T>,
        params: &ReadoutParams<T>,
    ) -> Result<Self> {
        params.validate()?;
        let schedule = RateSchedule::from_trajectory(traj, params);
        let kick = schedule.max_gamma_m() * schedule.dt();
        if kick > T::lit(MAX_STEP_KICK * (1.0 + 1e-9)) {
            return Err(Error::StepTooCoarse {
                quantity: "Gamma_m * dt",
                value: to_f64(kick),
                limit: MAX_STEP_KICK,
            });
        }
        let inefficiency = params.inefficiency_factor(schedule.measurement_integral());
        Ok(Self {
            prior: psi_i.density(),
            params: *params,
            noise_scale: schedule.dt().sqrt().recip(),
            schedule,
            inefficiency,
        })
    }

    pub fn schedule(&self) -> &RateSchedule<T> {
        &self.schedule
    }

    /// Runs one record with unit-variance draws from `noise`; each step emits
    /// `I_k = -a_k <sigma_z> + noise() / sqrt(dt)` and then updates.
    pub fn run_with<F, S>(&self, mut noise: F, mut sink: S) -> Result<(T, DensityMatrix<T>)>
    where
        F: FnMut() -> T,
        S: FnMut(T),
    {
        let dt = self.schedule.dt();
        let scale = self.params.detection_scale().sqrt();
        let mut filter = BayesianFilter::new(self.prior, &self.params);
        let mut sum = T::zero();
        for rates in self.schedule.steps() {
            let current = -scale * rates.sqrt_ci * filter.sigma_z() + noise() * self.noise_scale;
            filter.step(current, rates, dt);
            sum = sum + current;
            sink(current);
        }
        let rho = filter.state()?;
        let rho = rho.with_coherence(rho.rho12() * self.inefficiency);
        let n = T::from_usize(self.schedule.len()).expect("length fits scalar");
        Ok((sum / n, rho))
    }

    /// Outcome only; nothing but `x` and the final state is kept.
    pub fn run(&self, seed: u64) -> Result<TrajectoryOutcome<T>>
    where
        StandardNormal: Distribution<T>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, rho) = self.run_with(|| rng.sample(StandardNormal), |_| {})?;
        Ok(TrajectoryOutcome { x, rho })
    }

    pub fn run_record(&self, seed: u64) -> Result<(MeasurementRecord<T>, DensityMatrix<T>)>
    where
        StandardNormal: Distribution<T>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = Vec::with_capacity(self.schedule.len());
        let (_, rho) = self.run_with(|| rng.sample(StandardNormal), |i| samples.push(i))?;
        Ok((MeasurementRecord::new(samples, self.schedule.dt(), seed)?, rho))
    }
}

/// Simulates one record from `psi_i` and returns it with the final
/// conditioned state, inefficiency factor included.
pub fn simulate_record<T: Real>(
    psi_i: &PureQubitState<T>,
    traj: &CavityFieldTrajectory<T>,
    params: &ReadoutParams<T>,
    seed: u64,
) -> Result<(MeasurementRecord<T>, DensityMatrix<T>)>
where
    StandardNormal: Distribution<T>,
{
    Simulator::new(psi_i, traj, params)?.run_record(seed)
}
