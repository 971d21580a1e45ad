//! Scalar layer: arbitrary-precision rational numbers.
//!
//! `Rational` is a big-integer ratio kept in lowest terms with a positive
//! denominator (zero is 0/1); all arithmetic and comparisons are exact.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Rational from an integer.
pub fn rat(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// Rational `num/den`, reduced. Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Nearest `f64` to `r`, for display and estimation only.
pub fn approx(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A rational `u ≥ √r` with `u² ≥ r`, computed exactly.
///
/// Uses `√(p/q) = √(pq)/q ≤ ⌈√(pq)⌉/q`, so the result is tight to within
/// `1/q`. Panics if `r` is negative.
pub fn sqrt_upper_bound(r: &Rational) -> Rational {
    assert!(!r.is_negative(), "sqrt_upper_bound of a negative rational");
    if r.is_zero() {
        return Rational::zero();
    }
    let prod: BigInt = r.numer() * r.denom();
    let root = prod.sqrt();
    let root = if &root * &root == prod { root } else { root + 1 };
    Rational::new(root, r.denom().clone())
}
