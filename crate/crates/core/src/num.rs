//! Scalar abstraction shared by the numeric stages (features, alignment,
//! metrics, projection).
//!
//! Durations and onsets are exact rationals ([`Rational`]); everything that
//! leaves the rational domain is generic over [`Scalar`], implemented for
//! `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Exact rational used for durations, onsets and bar capacities.
pub type Rational = Ratio<i64>;

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumAssignOps + Sum + Debug + Display + Default + Send + Sync + 'static
{
    #[doc(hidden)]
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Nearest scalar to an exact rational.
    #[inline]
    fn from_rational(r: Rational) -> Self {
        Self::lit(*r.numer() as f64) / Self::lit(*r.denom() as f64)
    }

    #[doc(hidden)]
    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + NumAssignOps
        + Sum
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Rounds to 6 decimal places; used wherever a float is serialized.
pub fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    // normalise -0.0 so serialization never prints "-0.0"
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
