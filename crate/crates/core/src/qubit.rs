//! Qubit states in the `{|1>, |2>}` basis.
//!
//! `sigma_z |1> = +|1>` and `sigma_z |2> = -|2>`, so a qubit in `|1>` pulls the
//! homodyne current towards `-sqrt(Gamma_ci)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Complex amplitude, field or weak value.
pub type ComplexScalar<T = f64> = Complex<T>;

/// Polar/azimuthal angles of `cos(theta/2)|1> + sin(theta/2) e^{-i phi}|2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngles<T: Real = f64> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> BlochAngles<T> {
    /// `theta` must lie in `[0, pi]`; `phi` is wrapped into `[0, 2pi)`.
    pub fn new(theta: T, phi: T) -> Result<Self> {
        if !theta.is_finite() || theta < T::zero() || theta > T::PI() {
            return Err(Error::InvalidParams {
                name: "theta",
                reason: format!("{theta} outside [0, pi]"),
            });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParams {
                name: "phi",
                reason: "not finite".into(),
            });
        }
        Ok(Self {
            theta,
            phi: wrap_angle(phi),
        })
    }

    /// Post-selection states in the sweeps only vary the polar angle.
    pub fn polar(theta: T) -> Result<Self> {
        Self::new(theta, T::zero())
    }
}

/// Wrap into `[0, 2pi)`.
pub fn wrap_angle<T: Real>(phi: T) -> T {
    let two_pi = T::TAU();
    let w = phi % two_pi;
    let w = if w < T::zero() { w + two_pi } else { w };
    if w >= two_pi {
        T::zero()
    } else {
        w
    }
}

/// Normalized pure qubit state `c1|1> + c2|2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubitState<T: Real = f64> {
    c1: Complex<T>,
    c2: Complex<T>,
}

impl<T: Real> PureQubitState<T> {
    /// Normalizes the pair; fails on a zero vector or non-finite input.
    pub fn new(c1: Complex<T>, c2: Complex<T>) -> Result<Self> {
        let norm = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        if !norm.is_finite() || norm <= T::singular_threshold() {
            return Err(Error::InvalidState(format!(
                "amplitudes cannot be normalized (norm {norm})"
            )));
        }
        Ok(Self {
            c1: c1 / norm,
            c2: c2 / norm,
        })
    }

    pub fn one() -> Self {
        Self {
            c1: Complex::new(T::one(), T::zero()),
            c2: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn two() -> Self {
        Self {
            c1: Complex::new(T::zero(), T::zero()),
            c2: Complex::new(T::one(), T::zero()),
        }
    }

    pub fn c1(&self) -> Complex<T> {
        self.c1
    }

    pub fn c2(&self) -> Complex<T> {
        self.c2
    }

    /// Global phase fixed so that `c1` is real and nonnegative
    /// (or `c2` when `c1` vanishes).
    pub fn canonical(&self) -> Self {
        let lead = if self.c1.norm() > T::singular_threshold() {
            self.c1
        } else {
            self.c2
        };
        let phase = Complex::from_polar(T::one(), -lead.arg());
        let mut c1 = self.c1 * phase;
        if self.c1.norm() > T::singular_threshold() {
            c1.im = T::zero();
        }
        Self {
            c1,
            c2: self.c2 * phase,
        }
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Complex<T> {
        self.c1.conj() * other.c1 + self.c2.conj() * other.c2
    }

    pub fn sigma_z(&self) -> T {
        self.c1.norm_sqr() - self.c2.norm_sqr()
    }

    pub fn density(&self) -> DensityMatrix<T> {
        density_from_pure(self)
    }
}

/// Two-level density matrix stored as `(rho11, rho12)`; `rho22 = 1 - rho11`
/// and `rho21 = conj(rho12)`, so trace and hermiticity hold by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<T: Real = f64> {
    rho11: T,
    rho12: Complex<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(rho11: T, rho12: Complex<T>) -> Result<Self> {
        let rho = Self { rho11, rho12 };
        rho.check()?;
        Ok(rho)
    }

    /// Builds without validation; callers that compose exact updates use this
    /// and assert [`DensityMatrix::is_valid`] in tests.
    pub(crate) fn from_parts(rho11: T, rho12: Complex<T>) -> Self {
        Self { rho11, rho12 }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho11: T::lit(0.5),
            rho12: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn rho11(&self) -> T {
        self.rho11
    }

    pub fn rho22(&self) -> T {
        T::one() - self.rho11
    }

    pub fn rho12(&self) -> Complex<T> {
        self.rho12
    }

    pub fn rho21(&self) -> Complex<T> {
        self.rho12.conj()
    }

    pub fn sigma_z(&self) -> T {
        self.rho11 - self.rho22()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> T {
        let two = T::lit(2.0);
        self.rho11 * self.rho11 + self.rho22() * self.rho22() + two * self.rho12.norm_sqr()
    }

    /// `<psi|rho|psi>`, the post-selection probability onto `psi`.
    pub fn expectation(&self, psi: &PureQubitState<T>) -> T {
        let b1 = psi.c1();
        let b2 = psi.c2();
        let two = T::lit(2.0);
        b1.norm_sqr() * self.rho11
            + b2.norm_sqr() * self.rho22()
            + two * (b1.conj() * b2 * self.rho12).re
    }

    /// Same matrix with `rho12` replaced.
    pub fn with_coherence(&self, rho12: Complex<T>) -> Self {
        Self {
            rho11: self.rho11,
            rho12,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    fn check(&self) -> Result<()> {
        let slack = T::positivity_slack();
        if !self.rho11.is_finite() || !self.rho12.re.is_finite() || !self.rho12.im.is_finite() {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        if self.rho11 < -slack || self.rho11 > T::one() + slack {
            return Err(Error::InvalidState(format!(
                "rho11 = {} outside [0, 1]",
                self.rho11
            )));
        }
        if self.rho12.norm_sqr() > self.rho11 * self.rho22() + slack {
            return Err(Error::InvalidState(format!(
                "|rho12|^2 = {} exceeds rho11 * rho22 = {}",
                self.rho12.norm_sqr(),
                self.rho11 * self.rho22()
            )));
        }
        Ok(())
    }

    /// Bloch angles of a pure state; `None` at the poles where `phi` is
    /// undefined.
    pub fn angles(&self) -> Option<BlochAngles<T>> {
        let p = self.rho11.max(T::zero()).min(T::one());
        let theta = T::lit(2.0) * p.sqrt().acos();
        if self.rho12.norm() <= T::singular_threshold() {
            return None;
        }
        // rho12 = c1 conj(c2) = cos(theta/2) sin(theta/2) e^{+i phi}
        BlochAngles::new(theta, self.rho12.arg()).ok()
    }
}

pub fn pure_from_angles<T: Real>(angles: BlochAngles<T>) -> PureQubitState<T> {
    let half = angles.theta / T::lit(2.0);
    PureQubitState {
        c1: Complex::new(half.cos(), T::zero()),
        c2: Complex::from_polar(half.sin(), -angles.phi),
    }
}

pub fn density_from_pure<T: Real>(psi: &PureQubitState<T>) -> DensityMatrix<T> {
    DensityMatrix {
        rho11: psi.c1().norm_sqr(),
        rho12: psi.c1() * psi.c2().conj(),
    }
}

/// `F = Tr(rho_true rho_est)`; equals the usual fidelity when `true_state`
/// is pure.
pub fn fidelity<T: Real>(true_state: &DensityMatrix<T>, estimate: &DensityMatrix<T>) -> T {
    let two = T::lit(2.0);
    true_state.rho11() * estimate.rho11()
        + true_state.rho22() * estimate.rho22()
        + two * (true_state.rho12() * estimate.rho12().conj()).re
}
