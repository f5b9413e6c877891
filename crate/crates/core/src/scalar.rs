//! Floating-point abstraction shared by every analytic routine.
//!
//! All formulas are written against [`Scalar`], implemented for `f32` and
//! `f64`. The crate root exposes `f64` aliases for everyday use.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type used by the model, the quadrature and the samplers.
pub trait Scalar:
    'static
    + Send
    + Sync
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Lossy conversion back to `f64`, used for reporting and RNG plumbing.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex counterpart of a [`Scalar`], used for transforms at imaginary arguments.
pub type ComplexValue<T> = Complex<T>;

/// Converts decibels to a linear power ratio.
pub fn db_to_linear<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db<T: Scalar>(lin: T) -> T {
    T::lit(10.0) * lin.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_round_trip() {
        assert!((db_to_linear(15.0_f64) - 31.622_776_601_683_793).abs() < 1e-12);
        assert!((linear_to_db(1e-4_f64) + 40.0).abs() < 1e-12);
        assert!((db_to_linear(40.0_f32) - 1e4).abs() < 1.0);
    }
}
