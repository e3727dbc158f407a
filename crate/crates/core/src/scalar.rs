//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the solvers are generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// `ln cosh t` without overflow for large `|t|`.
pub fn ln_cosh<T: Real>(t: T) -> T {
    let a = t.abs();
    // ln cosh a = a + ln(1 + e^{-2a}) - ln 2
    a + (-(a + a)).exp().ln_1p() - T::LN_2()
}

/// `sech^2 t = 1 - tanh^2 t`.
pub fn sech2<T: Real>(t: T) -> T {
    let th = t.tanh();
    T::one() - th * th
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_cosh_matches_naive_and_survives_large_arguments() {
        for &t in &[0.0_f64, 0.3, -1.7, 5.0, 20.0] {
            assert!((ln_cosh(t) - t.cosh().ln()).abs() < 1e-13);
        }
        let big = ln_cosh(1000.0_f64);
        assert!((big - (1000.0 - std::f64::consts::LN_2)).abs() < 1e-9);
        assert!(ln_cosh(800.0_f32).is_finite());
    }

    #[test]
    fn sech2_at_zero_is_one() {
        assert_eq!(sech2(0.0_f64), 1.0);
        assert!(sech2(400.0_f64) >= 0.0);
    }
}
