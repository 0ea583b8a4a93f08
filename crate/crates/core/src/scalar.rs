//! Floating-point scalar abstraction shared by every numeric routine.

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar the library is generic over. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// Relative off-diagonal tolerance for the Jacobi sweep.
    ///
    /// `1e-12` in double precision; a few ulps for narrower types.
    fn jacobi_tol() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(8.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
