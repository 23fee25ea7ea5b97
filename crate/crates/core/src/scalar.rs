//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used for samples, scores and densities.
///
/// Implemented for `f32` and `f64`. Time values (seconds) are always `f64`
/// regardless of the scalar chosen for signal or score data.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from `f64`; panics only on values the
    /// scalar type cannot represent at all (never for finite inputs).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 representable in scalar type")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
