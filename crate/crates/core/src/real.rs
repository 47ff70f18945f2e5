//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar accepted by the numerical core: `f32` or `f64`.
///
/// Validation thresholds are written for `f64`. `TOL_FLOOR` raises them to
/// something the type can actually resolve, so `f32` pipelines are checked
/// against their own round-off instead of failing every invariant.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Debug + Display + Sum
{
    const TOL_FLOOR: f64;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }

    /// `base` raised to the precision floor of this type.
    #[inline]
    fn tol(base: f64) -> f64 {
        base.max(Self::TOL_FLOOR)
    }
}

impl Real for f64 {
    const TOL_FLOOR: f64 = 0.0;
}

impl Real for f32 {
    const TOL_FLOOR: f64 = 1e-4;
}
