//! Scalar abstraction for interval lengths.
//!
//! Strategies are generic over the length type: `f32`/`f64` for transcendental
//! constructions, [`BigRational`] for optimizer witnesses and [`QNumber`] for
//! exact lex-merge lengths.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Float, Signed, ToPrimitive};

use crate::qnum::QNumber;

/// Relative tolerance used when a float comparison cannot be exact.
pub const FLOAT_RATIO_TOLERANCE: f64 = 1e-12;

/// Non-negative rational exponent `num/den`, used for thresholds `2^(num/den)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent {
    pub num: u64,
    pub den: u64,
}

impl Exponent {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "exponent denominator must be positive");
        Exponent { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `1 - self`, saturating at zero.
    pub fn complement(self) -> Self {
        Exponent::new(self.den.saturating_sub(self.num), self.den)
    }

    /// `2^self` as a float.
    pub fn pow2(self) -> f64 {
        self.value().exp2()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// An interval length.
pub trait Length: Clone + fmt::Debug + Send + Sync {
    /// Total order on lengths (panics on NaN for floats).
    fn cmp_len(&self, other: &Self) -> Ordering;

    fn add_len(&self, other: &Self) -> Self;

    fn to_f64(&self) -> f64;

    fn is_positive_len(&self) -> bool;

    /// Whether `a + b` equals `self` (within float tolerance for floats).
    fn is_sum_of(&self, a: &Self, b: &Self) -> bool;

    /// `self / other` as a float.
    fn ratio_f64(&self, other: &Self) -> f64 {
        self.to_f64() / other.to_f64()
    }

    /// Compares `self` against `2^exp * other`.
    ///
    /// Floats treat relative differences below [`FLOAT_RATIO_TOLERANCE`] as
    /// `Equal`. Exact types override this where the threshold is representable.
    fn cmp_scaled(&self, other: &Self, exp: Exponent) -> Ordering {
        default_cmp_scaled(self, other, exp)
    }

    /// True when the comparisons made by [`Length::cmp_scaled`] are exact.
    fn exact_scaled(&self, _exp: Exponent) -> bool {
        false
    }
}

macro_rules! float_length {
    ($t:ty) => {
        impl Length for $t {
            fn cmp_len(&self, other: &Self) -> Ordering {
                self.partial_cmp(other).expect("NaN length")
            }
            fn add_len(&self, other: &Self) -> Self {
                self + other
            }
            fn to_f64(&self) -> f64 {
                f64::from(*self)
            }
            fn is_positive_len(&self) -> bool {
                *self > 0.0
            }
            fn is_sum_of(&self, a: &Self, b: &Self) -> bool {
                float_sum_matches(*self, *a, *b)
            }
        }
    };
}

float_length!(f32);
float_length!(f64);

fn float_sum_matches<T: Float>(whole: T, a: T, b: T) -> bool {
    let tol = T::from(FLOAT_RATIO_TOLERANCE).unwrap() * whole.abs().max(T::min_positive_value());
    // f32 cannot resolve 1e-12; allow a few ulps as well.
    let ulps = T::epsilon() * T::from(4.0).unwrap() * whole.abs();
    (whole - (a + b)).abs() <= tol.max(ulps)
}

impl Length for BigRational {
    fn cmp_len(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn add_len(&self, other: &Self) -> Self {
        self + other
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_positive_len(&self) -> bool {
        self.is_positive()
    }
    fn is_sum_of(&self, a: &Self, b: &Self) -> bool {
        *self == a + b
    }
    fn ratio_f64(&self, other: &Self) -> f64 {
        ToPrimitive::to_f64(&(self / other)).unwrap_or(f64::NAN)
    }
    fn cmp_scaled(&self, other: &Self, exp: Exponent) -> Ordering {
        // 2^(num/den) is rational only when den divides num.
        if exp.num.is_multiple_of(exp.den) {
            let factor = BigRational::from_integer(num_bigint::BigInt::from(1u8) << (exp.num / exp.den));
            return self.cmp(&(other * factor));
        }
        default_cmp_scaled(self, other, exp)
    }
    fn exact_scaled(&self, exp: Exponent) -> bool {
        exp.num.is_multiple_of(exp.den)
    }
}

fn default_cmp_scaled<L: Length>(a: &L, b: &L, exp: Exponent) -> Ordering {
    let ratio = a.ratio_f64(b);
    let target = exp.pow2();
    if (ratio - target).abs() <= FLOAT_RATIO_TOLERANCE * target {
        Ordering::Equal
    } else if ratio < target {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl Length for QNumber {
    fn cmp_len(&self, other: &Self) -> Ordering {
        self.compare(other).expect("QNumber modulus mismatch")
    }
    fn add_len(&self, other: &Self) -> Self {
        self + other
    }
    fn to_f64(&self) -> f64 {
        QNumber::to_f64(self)
    }
    fn is_positive_len(&self) -> bool {
        self.signum() == Ordering::Greater
    }
    fn is_sum_of(&self, a: &Self, b: &Self) -> bool {
        *self == a + b
    }
    fn ratio_f64(&self, other: &Self) -> f64 {
        self.to_float(1e-16) / other.to_float(1e-16)
    }
    fn cmp_scaled(&self, other: &Self, exp: Exponent) -> Ordering {
        // 2^(num/den) = q^(num m / den) whenever den divides num * m.
        let m = u64::from(self.modulus());
        match q_exponent(exp, m) {
            Some(k) => self.cmp_len(&other.mul_q_power(k)),
            None => default_cmp_scaled(self, other, exp),
        }
    }
    fn exact_scaled(&self, exp: Exponent) -> bool {
        q_exponent(exp, u64::from(self.modulus())).is_some()
    }
}

fn q_exponent(exp: Exponent, m: u64) -> Option<u64> {
    let scaled = exp.num.checked_mul(m)?;
    (scaled % exp.den == 0).then(|| scaled / exp.den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn float_scaled_comparison_has_tolerance() {
        let a = std::f64::consts::SQRT_2;
        assert_eq!(a.cmp_scaled(&1.0, Exponent::new(1, 2)), Ordering::Equal);
        assert_eq!(1.3f64.cmp_scaled(&1.0, Exponent::new(1, 2)), Ordering::Less);
        assert!(!1.0f64.exact_scaled(Exponent::new(1, 2)));
    }

    #[test]
    fn qnumber_scaled_comparison_is_exact() {
        let m = 4;
        let q3 = QNumber::q_power(m, 3);
        let one = QNumber::one(m);
        assert_eq!(q3.cmp_scaled(&one, Exponent::new(3, 4)), Ordering::Equal);
        assert_eq!(q3.cmp_scaled(&one, Exponent::new(1, 2)), Ordering::Greater);
        assert!(q3.exact_scaled(Exponent::new(1, 2)));
        assert!(!q3.exact_scaled(Exponent::new(1, 3)));
    }

    #[test]
    fn rational_sum_is_exact() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let one = BigRational::from_integer(BigInt::from(1));
        assert!(one.is_sum_of(&half, &half));
        assert_eq!(one.cmp_scaled(&half, Exponent::new(1, 1)), Ordering::Equal);
    }

    #[test]
    fn f32_sums_use_ulps() {
        let third = 1.0f32 / 3.0;
        assert!(1.0f32.is_sum_of(&third, &(2.0 * third)));
        assert!(!1.0f32.is_sum_of(&third, &third));
    }
}
