//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point type usable as matrix entry, time value and LP coefficient.
///
/// Implemented for `f32` and `f64`. Tolerances throughout the crate are
/// stated in `f64` and converted with [`Scalar::lit`].
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every tolerance in the crate goes through here.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Max-abs norm of a vector. Returns zero for an empty slice.
pub fn vec_inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

pub fn vec_min<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().fold(T::infinity(), T::min)
}

pub fn vec_max<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().fold(T::neg_infinity(), T::max)
}
