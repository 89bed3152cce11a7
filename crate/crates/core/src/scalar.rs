//! Scalar abstractions.
//!
//! Sampling and density code is written against [`Real`], which is
//! implemented for `f32` and `f64`. The closed-form dependence calculators
//! only need field arithmetic and accept any [`Field`], which includes
//! exact rationals such as [`num_rational::Rational64`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num};

/// Floating-point scalar used by the samplers and summaries.
///
/// Random variates and special functions are evaluated in `f64` and cast
/// into `Self`, so an `f32` model carries `f32` state but draws from the
/// same streams as an `f64` model.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Absolute tolerance on `|sum(p) - 1|` for a probability vector.
    const SIMPLEX_TOL: f64;

    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable in every Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("Real converts to f64")
    }

    #[inline]
    fn of_count(n: u64) -> Self {
        Self::of(n as f64)
    }
}

impl Real for f64 {
    const SIMPLEX_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const SIMPLEX_TOL: f64 = 1e-5;
}

/// Field arithmetic sufficient for the rational correlation formulas.
pub trait Field: Num + Copy + PartialOrd + FromPrimitive + Debug {}

impl<T: Num + Copy + PartialOrd + FromPrimitive + Debug> Field for T {}

/// Lift an integer precision into a field element.
#[inline]
pub(crate) fn lift<S: Field>(n: u64) -> S {
    S::from_u64(n).expect("integer precision representable in field")
}
