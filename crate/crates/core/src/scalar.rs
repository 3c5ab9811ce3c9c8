use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar used throughout the crate.
///
/// Implemented for `f32` and `f64`. Default tolerances are tuned for `f64`;
/// the `f32` instantiation works but loosens them through [`Real::tol`].
pub trait Real:
    Float + FloatConst + FromPrimitive + Default + fmt::Debug + fmt::Display + fmt::LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable literal")
    }

    /// Converts a count.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    /// A relative tolerance of `x`, but never tighter than a few hundred ulps.
    #[inline]
    fn tol(x: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(256.0);
        Self::lit(x).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `log(e^a + e^b)` without overflow.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == T::neg_infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// An element of ℝ ∪ {+∞}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> ExtReal<T> {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<T> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    /// `e^{-x}`, which is exactly zero at +∞.
    pub fn exp_neg(self) -> T {
        match self {
            ExtReal::Finite(x) => (-x).exp(),
            ExtReal::Infinite => T::zero(),
        }
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl<T> From<T> for ExtReal<T> {
    fn from(x: T) -> Self {
        ExtReal::Finite(x)
    }
}
