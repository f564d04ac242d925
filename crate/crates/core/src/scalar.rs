//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All math is written once against [`Real`] and instantiated for `f32` and
//! `f64`. The bound is nalgebra's `RealField` (so that complex SVD works on
//! `Complex<T>`) plus the `num-traits` conversions used at API boundaries.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable throughout the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Display + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal or parameter into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 is representable in every Real type")
}

/// Converts a count into `T`.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize is representable in every Real type")
}

/// Lossy conversion back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Compensated (Neumaier) accumulator.
///
/// Used for long sums of same-sign magnitudes where plain accumulation
/// would lose the low-order bits.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }
}

impl<T: Real> CompensatedSum<T> {
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Max-shifted `ln Σ exp(x_i)`. Returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let neg_inf = lit::<T>(f64::NEG_INFINITY);
    let max = xs.iter().copied().fold(neg_inf, |a, b| a.max(b));
    if !max.is_finite() {
        return max;
    }
    let acc: CompensatedSum<T> = xs.iter().map(|&x| (x - max).exp()).collect();
    max + acc.value().ln()
}
