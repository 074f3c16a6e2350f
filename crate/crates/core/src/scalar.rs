//! Scalar abstraction shared by the probability-mass algorithms.
//!
//! The discrete-time machinery (PMFs, convolutions, recursions, series
//! division, finite-horizon dynamic programming) only needs field
//! arithmetic, so it runs unchanged over `f32`, `f64` and exact rationals.
//! Root finding and the continuous models stay in floating point.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like number type usable as a probability.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Slack allowed when checking that masses sum to one.
    fn mass_tolerance() -> Self;

    /// Lossy view used for reporting and for the floating-point kernels.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite value")
    }
}

impl Scalar for f64 {
    fn mass_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn mass_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for Ratio<BigInt> {
    fn mass_tolerance() -> Self {
        Ratio::from_integer(BigInt::from(0))
    }
}

/// Floating-point scalar for the grid kernels (`f32` or `f64`).
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Send + Sync + 'static {}
