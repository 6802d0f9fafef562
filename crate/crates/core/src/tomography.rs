//! Weak values, post-selected averages and state reconstruction.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cavity::IntegratedFactors;
use crate::error::{Error, Result};
use crate::qubit::PureQubitState;
use crate::scalar::Real;
use crate::trajectory::{trajectory_seed, TrajectoryOutcome};

/// Complex weak value of `sigma_z`.
pub type WeakValue<T = f64> = Complex<T>;

const MIN_OVERLAP: f64 = 1e-12;

/// `sigma_w = (A - B)/(A + B)` with `A = b1* c1 exp(-i Phi1)`, `B = b2* c2`.
pub fn true_weak_value<T: Real>(
    psi_i: &PureQubitState<T>,
    psi_f: &PureQubitState<T>,
    phi1: T,
) -> Result<WeakValue<T>> {
    let a = psi_f.c1().conj() * psi_i.c1() * Complex::from_polar(T::one(), -phi1);
    let b = psi_f.c2().conj() * psi_i.c2();
    let overlap = a + b;
    if overlap.norm() < T::lit(MIN_OVERLAP) {
        return Err(Error::OrthogonalPostSelection {
            overlap: overlap.norm().to_f64().unwrap_or(0.0),
        });
    }
    Ok((a - b) / overlap)
}

/// `|<psi_f|psi_i>|` in the frame rotated by `Phi1`.
pub fn post_selection_overlap<T: Real>(psi_i: &PureQubitState<T>, psi_f: &PureQubitState<T>, phi1: T) -> T {
    let a = psi_f.c1().conj() * psi_i.c1() * Complex::from_polar(T::one(), -phi1);
    (a + psi_f.c2().conj() * psi_i.c2()).norm()
}

/// Closed-form post-selected average
/// `-(eps1 Re sigma + eps2 Im sigma) / (1 + G(|sigma|^2 - 1))`.
pub fn analytic_pps<T: Real>(sigma_w: WeakValue<T>, factors: &IntegratedFactors<T>) -> T {
    -(factors.eps1 * sigma_w.re + factors.eps2 * sigma_w.im) / denominator(sigma_w, factors.g_factor)
}

fn denominator<T: Real>(sigma: WeakValue<T>, g: T) -> T {
    T::one() + g * (sigma.norm_sqr() - T::one())
}

/// How trajectories enter the post-selected sub-ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PpsMode {
    /// Every trajectory weighted by `<psi_f|rho|psi_f>`.
    #[default]
    Weighted,
    /// Trajectory `j` accepted with that probability, reproducibly from `seed`.
    Bernoulli { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpsResult<T: Real = f64> {
    pub average: T,
    pub stderr: T,
    pub n_total: usize,
    /// Mean success probability (weighted) or accepted fraction (Bernoulli).
    pub acceptance: T,
}

/// Monte Carlo post-selected average of `x` over `outcomes`.
pub fn mc_pps<T: Real>(
    outcomes: &[TrajectoryOutcome<T>],
    psi_f: &PureQubitState<T>,
    mode: PpsMode,
) -> Result<PpsResult<T>> {
    let n = outcomes.len();
    let weights = outcomes.iter().map(|o| o.rho.expectation(psi_f).max(T::zero()));
    let weights: Vec<T> = match mode {
        PpsMode::Weighted => weights.collect(),
        PpsMode::Bernoulli { seed } => weights
            .enumerate()
            .map(|(j, w)| {
                let mut rng = ChaCha8Rng::seed_from_u64(trajectory_seed(seed, j as u64));
                if T::lit(rng.random::<f64>()) < w {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect(),
    };
    let total: T = weights.iter().copied().sum();
    if n == 0 || total <= T::zero() {
        return Err(Error::EmptyPostSelection {
            total_weight: total.to_f64().unwrap_or(0.0),
        });
    }
    let average = outcomes.iter().zip(&weights).map(|(o, &w)| w * o.x).sum::<T>() / total;
    // Ratio-estimator variance; reduces to s^2/n for 0/1 weights.
    let spread: T = outcomes
        .iter()
        .zip(&weights)
        .map(|(o, &w)| (w * (o.x - average)).powi(2))
        .sum();
    let stderr = spread.sqrt() / total;
    Ok(PpsResult {
        average,
        stderr,
        n_total: n,
        acceptance: total / T::from_usize(n).expect("count fits scalar"),
    })
}

/// Post-selected average measured at one local-oscillator phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseData<T: Real = f64> {
    pub pps_average: T,
    /// Standard error of `pps_average`; zero for exact inputs.
    pub pps_stderr: T,
    pub factors: IntegratedFactors<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractionMethod {
    /// Drops the `G(|sigma|^2 - 1)` denominator.
    Linear,
    /// Fixed-point iteration on the full relation.
    #[default]
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionOptions<T: Real = f64> {
    pub max_iter: usize,
    pub tol: T,
    pub method: ExtractionMethod,
}

impl<T: Real> Default for ExtractionOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: T::lit(1e-10),
            method: ExtractionMethod::Iterative,
        }
    }
}

impl<T: Real> ExtractionOptions<T> {
    pub fn linear() -> Self {
        Self {
            method: ExtractionMethod::Linear,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractedWeakValue<T: Real = f64> {
    pub value: WeakValue<T>,
    /// Standard errors of the real and imaginary parts.
    pub stderr: Complex<T>,
    pub iterations: usize,
    /// `|sigma|^2` beyond `(1 - G)/G`, where the relation has a second root.
    pub ambiguous: bool,
}

struct PhaseSystem<T: Real> {
    inv: [[T; 2]; 2],
    g: [T; 2],
}

impl<T: Real> PhaseSystem<T> {
    fn new(phases: &[PhaseData<T>; 2]) -> Result<Self> {
        let [a, b] = phases.map(|p| p.factors);
        let det = a.eps1 * b.eps2 - a.eps2 * b.eps1;
        let scale = (a.eps1.powi(2) + a.eps2.powi(2)).sqrt() * (b.eps1.powi(2) + b.eps2.powi(2)).sqrt();
        if det.is_nan() || det.abs() <= T::singular_threshold() * scale {
            return Err(Error::SingularPhaseSet {
                det: det.to_f64().unwrap_or(0.0),
            });
        }
        Ok(Self {
            inv: [[b.eps2 / det, -a.eps2 / det], [-b.eps1 / det, a.eps1 / det]],
            g: [a.g_factor, b.g_factor],
        })
    }

    /// `sigma` with `eps1_k Re sigma + eps2_k Im sigma = rhs_k`.
    fn solve(&self, rhs: [T; 2]) -> WeakValue<T> {
        Complex::new(
            self.inv[0][0] * rhs[0] + self.inv[0][1] * rhs[1],
            self.inv[1][0] * rhs[0] + self.inv[1][1] * rhs[1],
        )
    }

    fn map(&self, p: [T; 2], sigma: WeakValue<T>) -> WeakValue<T> {
        self.solve([
            -p[0] * denominator(sigma, self.g[0]),
            -p[1] * denominator(sigma, self.g[1]),
        ])
    }

    fn extract(&self, p: [T; 2], opts: &ExtractionOptions<T>) -> Result<(WeakValue<T>, usize)> {
        let mut sigma = self.solve([-p[0], -p[1]]);
        if opts.method == ExtractionMethod::Linear {
            return Ok((sigma, 0));
        }
        let mut step = (self.map(p, sigma) - sigma).norm();
        for iteration in 1..=opts.max_iter {
            let target = self.map(p, sigma);
            // Halve the update while it would grow the residual.
            let mut lambda = T::one();
            let mut next = target;
            let mut next_step = (self.map(p, next) - next).norm();
            while next_step > step && lambda > T::lit(1e-3) {
                lambda = lambda / T::lit(2.0);
                next = sigma + (target - sigma) * lambda;
                next_step = (self.map(p, next) - next).norm();
            }
            let moved = (next - sigma).norm();
            sigma = next;
            step = next_step;
            if !sigma.re.is_finite() || !sigma.im.is_finite() {
                break;
            }
            if moved <= opts.tol * (T::one() + sigma.norm()) {
                return Ok((sigma, iteration));
            }
        }
        Err(Error::NoConvergence {
            iterations: opts.max_iter,
            re: sigma.re.to_f64().unwrap_or(f64::NAN),
            im: sigma.im.to_f64().unwrap_or(f64::NAN),
            residual: step.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Weak value from post-selected averages at two non-degenerate phases.
pub fn extract_weak_value<T: Real>(
    phases: &[PhaseData<T>; 2],
    opts: &ExtractionOptions<T>,
) -> Result<ExtractedWeakValue<T>> {
    let system = PhaseSystem::new(phases)?;
    let p = [phases[0].pps_average, phases[1].pps_average];
    let (value, iterations) = system.extract(p, opts)?;

    // Delta-method errors from a central-difference Jacobian d sigma / d p.
    let mut var = [T::zero(); 2];
    for k in 0..2 {
        let sd = phases[k].pps_stderr;
        if sd == T::zero() {
            continue;
        }
        let h = T::lit(1e-6) * (p[k].abs() + sd);
        let shifted = |d: T| {
            let mut q = p;
            q[k] = q[k] + d;
            system.extract(q, opts).map(|(s, _)| s)
        };
        let derivative = (shifted(h)? - shifted(-h)?) / (T::lit(2.0) * h);
        var[0] = var[0] + (derivative.re * sd).powi(2);
        var[1] = var[1] + (derivative.im * sd).powi(2);
    }

    let g = system.g[0].max(system.g[1]);
    let ambiguous = g > T::zero() && value.norm_sqr() > (T::one() - g) / g;
    Ok(ExtractedWeakValue {
        value,
        stderr: Complex::new(var[0].sqrt(), var[1].sqrt()),
        iterations,
        ambiguous,
    })
}

/// Inverts `true_weak_value` for the initial state, up to global phase.
pub fn reconstruct<T: Real>(sigma_w: WeakValue<T>, psi_f: &PureQubitState<T>, phi1: T) -> Result<PureQubitState<T>> {
    let (b1, b2) = (psi_f.c1(), psi_f.c2());
    let tiny = T::lit(MIN_OVERLAP);
    if b1.norm() < tiny {
        return Err(Error::SingularReconstruction("post-selection state has no |1> component"));
    }
    if b2.norm() < tiny {
        return Err(Error::SingularReconstruction("post-selection state has no |2> component"));
    }
    let one = Complex::new(T::one(), T::zero());
    let plus = one + sigma_w;
    if plus.norm() < tiny {
        return Ok(PureQubitState::two());
    }
    let ratio = (one - sigma_w) / plus * (b1 / b2).conj();
    let c2_over_c1 = ratio * Complex::from_polar(T::one(), -phi1);
    Ok(PureQubitState::new(one, c2_over_c1)?.canonical())
}
