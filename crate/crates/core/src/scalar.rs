//! Scalar abstraction shared by the belief algebra, grids and geometry.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the library is generic over (`f32` or `f64`).
///
/// The tolerances are per-type: `f64` checks masses to 1e-9 as the
/// pipeline requires, `f32` cannot and uses a looser bound.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Absolute tolerance on the total mass of a mass function.
    fn mass_tolerance() -> Self;

    /// Drift of the total mass above which a result is renormalized.
    fn renormalize_threshold() -> Self;

    /// Conjunctive conflict at or above `1 - total_conflict_margin()` is total.
    fn total_conflict_margin() -> Self;

    /// Two pignistic probabilities closer than this are a tie.
    fn tie_tolerance() -> Self;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal out of range for scalar type")
    }
}

impl Scalar for f64 {
    fn mass_tolerance() -> Self {
        1e-9
    }
    fn renormalize_threshold() -> Self {
        1e-12
    }
    fn total_conflict_margin() -> Self {
        1e-12
    }
    fn tie_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn mass_tolerance() -> Self {
        1e-5
    }
    fn renormalize_threshold() -> Self {
        1e-6
    }
    fn total_conflict_margin() -> Self {
        1e-6
    }
    fn tie_tolerance() -> Self {
        1e-6
    }
}
