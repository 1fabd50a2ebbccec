//! Scalar abstraction for the floating-point parts of the library.
//!
//! Everything that is not exact rational arithmetic is generic over [`Real`],
//! so the same code runs in `f32` or `f64`. The concrete aliases exported from
//! the crate root fix `f64`, which is what the reference tolerances assume.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the library.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Natural log of the gamma function, `ln Γ(x)` for `x > 0`.
    fn ln_gamma(self) -> Self;

    /// Lossy conversion from `f64`, for constants baked into formulas.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant must be representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("value must be representable as f64")
    }
}

impl Real for f32 {
    fn ln_gamma(self) -> Self {
        libm::lgammaf_r(self).0
    }
}

impl Real for f64 {
    fn ln_gamma(self) -> Self {
        libm::lgamma_r(self).0
    }
}
