//! Scalar types the learning-graph machinery is generic over.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Weight and flow values.
///
/// Floating types carry logarithms; [`Rational`] is exact but cannot
/// represent the logarithmic sparse-load schedule.
pub trait Scalar: Clone + Debug + PartialOrd + Num + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn ln(&self) -> Option<Self>;

    /// Equality up to `rel` relative tolerance (ignored for exact types).
    fn close_to(&self, other: &Self, rel: f64) -> bool {
        if Self::EXACT {
            return self == other;
        }
        let a = self.to_f64().unwrap_or(f64::NAN);
        let b = other.to_f64().unwrap_or(f64::NAN);
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn ln(&self) -> Option<Self> {
        Some(f64::ln(*self))
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn ln(&self) -> Option<Self> {
        Some(f32::ln(*self))
    }
}

/// Arbitrary-precision rational.
pub type Rational = BigRational;

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn ln(&self) -> Option<Self> {
        None
    }
}

/// Builds an exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Sum of a sequence of scalars.
pub fn sum<S: Scalar>(items: impl IntoIterator<Item = S>) -> S {
    items.into_iter().fold(S::zero(), |acc, v| acc + v)
}
