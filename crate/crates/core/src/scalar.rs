//! Floating-point scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, NumCast, Signed};

/// Real floating-point type the library computes in: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumCast
    + NumAssign
    + Signed
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(k: usize) -> Self {
        <Self as NumCast>::from(k).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `k` as an element of any ring, built by repeated addition of one.
///
/// Used by the exact (rational) threshold formulas, which must not go
/// through a float.
pub(crate) fn ring_count<T: num_traits::Num + Copy>(k: usize) -> T {
    (0..k).fold(T::zero(), |acc, _| acc + T::one())
}
