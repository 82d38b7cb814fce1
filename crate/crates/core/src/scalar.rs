use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type for gains, costs, thresholds, and ratios.
///
/// Multiplicities stay integral ([`crate::lattice::Count`]); everything
/// valued is generic over this trait so the whole pipeline runs on `f32`
/// as well as the default `f64` (see the aliases at the crate root).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Absolute tolerance for value comparisons.
    fn abs_tol() -> Self;
}

impl Scalar for f64 {
    fn abs_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    // 1e-9 is below f32 resolution; use a tolerance the type can express.
    fn abs_tol() -> Self {
        1e-4
    }
}

/// Literal conversion; exact for `f64`.
pub fn val<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("finite literal")
}

/// Multiplicity-to-scalar conversion.
pub fn from_count<F: Scalar>(c: u64) -> F {
    F::from_u64(c).expect("count fits the scalar type")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_are_positive() {
        assert!(f64::abs_tol() > 0.0);
        assert!(f32::abs_tol() > 0.0);
    }

    #[test]
    fn conversions_round_trip_for_small_counts() {
        let x: f64 = from_count(12);
        assert_eq!(x, 12.0);
        let y: f32 = val(0.5);
        assert_eq!(y, 0.5f32);
    }
}
