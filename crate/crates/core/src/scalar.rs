//! Score scalar abstraction.
//!
//! Every similarity in this crate is a ratio of two non-negative integers
//! (Dice) or a ratio involving square roots (cosine). [`Scalar`] covers the
//! former and admits exact rationals; [`RealScalar`] adds the floating-point
//! operations needed by cosine and RMSE.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync
{
    /// `num / den` with a single rounding step at most. `den` must be non-zero.
    fn from_ratio(num: u128, den: u128) -> Self;

    /// Arithmetic mean of a non-empty slice.
    fn mean(values: &[Self]) -> Self {
        let sum = values.iter().cloned().fold(Self::zero(), |acc, v| acc + v);
        sum / Self::from_usize(values.len()).expect("length representable")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn from_ratio(num: u128, den: u128) -> Self {
        // Divide in f64 first so the result carries one f32 rounding.
        (num as f64 / den as f64) as f32
    }
}

impl Scalar for f64 {
    fn from_ratio(num: u128, den: u128) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: u128, den: u128) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Floating-point scores: cosine similarity and error statistics.
pub trait RealScalar: Scalar + Float {}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

/// `dot / sqrt(norm_x * norm_y)` from exact integer sums, clamped to `[0, 1]`.
///
/// Exactly parallel vectors (`dot² = norm_x · norm_y`) yield exactly one and
/// orthogonal vectors exactly zero, independent of float rounding.
pub(crate) fn cosine_ratio<S: RealScalar>(dot: u128, norm_x: u128, norm_y: u128) -> S {
    if dot == 0 {
        return S::zero();
    }
    if let (Some(lhs), Some(rhs)) = (dot.checked_mul(dot), norm_x.checked_mul(norm_y)) {
        if lhs == rhs {
            return S::one();
        }
    }
    let to_s = |v: u128| S::from_u128(v).expect("finite conversion");
    let value = to_s(dot) / (to_s(norm_x).sqrt() * to_s(norm_y).sqrt());
    value.min(S::one())
}
