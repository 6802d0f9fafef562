//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Tolerances that only make sense relative to the working precision
/// (positivity slack, orthogonality thresholds) are exposed here so generic
/// code never hard-codes an `f64` magnitude.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Slack allowed on `|rho12|^2 <= rho11 * rho22`.
    fn positivity_slack() -> Self;

    /// Below this magnitude an overlap or amplitude is treated as zero.
    fn singular_threshold() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }
}

impl Real for f64 {
    fn positivity_slack() -> Self {
        1e-12
    }
    fn singular_threshold() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn positivity_slack() -> Self {
        1e-5
    }
    fn singular_threshold() -> Self {
        1e-6
    }
}
