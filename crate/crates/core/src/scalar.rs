use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{FromPrimitive, Signed};

/// Coefficient field for every polynomial in the crate.
///
/// Anything that behaves like a field with a sign and a textual form works:
/// `BigRational` (the default, see [`crate::Rational`]), `Ratio<i64>` for
/// small exact experiments, or `f64` when exactness is not needed.
pub trait Scalar:
    Signed + FromPrimitive + FromStr + PartialOrd + Clone + Debug + Display + Send + Sync + 'static
{
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer fits in the scalar type")
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }
}

impl<T> Scalar for T where
    T: Signed + FromPrimitive + FromStr + PartialOrd + Clone + Debug + Display + Send + Sync + 'static
{
}
