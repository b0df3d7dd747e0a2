//! Scalar abstraction for the numeric core.
//!
//! Everything downstream is generic over [`Scalar`] so the same code
//! instantiates at f32 and f64. f64 is the workhorse; the crate root exports
//! concrete aliases for it.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + for<'a> Sum<&'a Self>
    + fmt::Display
    + fmt::LowerExp
    + fmt::Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// How constants (and all random draws) enter generic code.
    fn cast(x: f64) -> Self;

    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Standard normal CDF, `Phi(x) = erfc(-x/sqrt(2)) / 2`.
    fn normal_cdf(self) -> Self {
        Self::cast(0.5) * ((-self) / Self::cast(std::f64::consts::SQRT_2)).erfc()
    }
}

impl Scalar for f64 {
    fn cast(x: f64) -> Self {
        x
    }

    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Scalar for f32 {
    fn cast(x: f64) -> Self {
        x as f32
    }

    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}
