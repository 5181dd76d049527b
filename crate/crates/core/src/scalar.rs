//! Floating-point abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used by embedding tables, the network kernels and the
/// literal usage score. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64` (always succeeds for finite input).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Name recorded in checkpoint manifests.
    const TYPE_NAME: &'static str;
}

impl Scalar for f32 {
    const TYPE_NAME: &'static str = "f32";
}

impl Scalar for f64 {
    const TYPE_NAME: &'static str = "f64";
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of(0.5).as_f64(), 0.5);
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]), 11.0);
        assert_eq!(norm(&[3.0f32, 4.0]), 5.0);
    }
}
