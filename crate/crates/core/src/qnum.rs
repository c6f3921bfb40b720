//! Exact arithmetic in the ring `Z[q]` with `q = 2^(1/m)`.
//!
//! Every basket length produced by lex-merge is an integer combination of
//! `1, q, ..., q^(m-1)`. Elements are kept in reduced form (the rule
//! `q^m = 2` is applied eagerly), so two elements are equal exactly when their
//! coefficient vectors are equal: `x^m - 2` is irreducible over `Q`, hence the
//! powers `q^0..q^(m-1)` are linearly independent.
//!
//! Ordering is decided by evaluating the difference with certified integer
//! enclosures of `q^x * 2^p` (integer `m`-th roots), doubling `p` until the
//! enclosure excludes zero. A nonzero element never has value zero, so the
//! loop terminates.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Working precision (bits) of the first comparison round.
const START_PRECISION: u32 = 53;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QnumError {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
}

/// An element of `Z[2^(1/m)]`, stored as `coeffs[x]` = coefficient of `q^x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QNumber {
    modulus: u32,
    coeffs: Vec<BigInt>,
}

impl QNumber {
    pub fn zero(m: u32) -> Self {
        assert!(m >= 1, "modulus must be positive");
        QNumber {
            modulus: m,
            coeffs: vec![BigInt::zero(); m as usize],
        }
    }

    pub fn one(m: u32) -> Self {
        Self::q_power(m, 0)
    }

    /// `q^k` in reduced form: `2^(k div m) * q^(k mod m)`.
    pub fn q_power(m: u32, k: u64) -> Self {
        let mut out = Self::zero(m);
        let m64 = u64::from(m);
        out.coeffs[(k % m64) as usize] = BigInt::one() << (k / m64);
        out
    }

    /// Builds a reduced element from coefficients of `q^0, q^1, ...`.
    ///
    /// Vectors longer than `m` are folded with `q^m = 2`.
    pub fn from_coeffs(m: u32, coeffs: Vec<BigInt>) -> Result<Self, QnumError> {
        if m == 0 {
            return Err(QnumError::ZeroModulus);
        }
        let mut out = Self::zero(m);
        for (k, c) in coeffs.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = k as u64;
            let m64 = u64::from(m);
            out.coeffs[(k % m64) as usize] += c << (k / m64);
        }
        Ok(out)
    }

    /// Strict constructor: exactly `m` coefficients.
    pub fn from_reduced(m: u32, coeffs: Vec<BigInt>) -> Result<Self, QnumError> {
        if m == 0 {
            return Err(QnumError::ZeroModulus);
        }
        if coeffs.len() != m as usize {
            return Err(QnumError::CoefficientCount {
                expected: m as usize,
                got: coeffs.len(),
            });
        }
        Ok(QNumber { modulus: m, coeffs })
    }

    pub fn from_i64s(m: u32, coeffs: &[i64]) -> Result<Self, QnumError> {
        Self::from_reduced(m, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficients as machine integers, if they all fit.
    pub fn to_i64_coeffs(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(|c| c.to_i64()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check(&self, other: &Self) -> Result<(), QnumError> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(QnumError::ModulusMismatch(self.modulus, other.modulus))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, QnumError> {
        self.check(other)?;
        Ok(QNumber {
            modulus: self.modulus,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, QnumError> {
        self.check(other)?;
        Ok(QNumber {
            modulus: self.modulus,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Product: coefficient convolution, then `q^(m+j) = 2 q^j`.
    pub fn try_mul(&self, other: &Self) -> Result<Self, QnumError> {
        self.check(other)?;
        let m = self.modulus as usize;
        let mut out = vec![BigInt::zero(); m];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let p = a * b;
                if i + j < m {
                    out[i + j] += p;
                } else {
                    out[i + j - m] += p << 1;
                }
            }
        }
        Ok(QNumber {
            modulus: self.modulus,
            coeffs: out,
        })
    }

    /// Multiplies by `q^k` (a cyclic shift with doubling on wrap).
    pub fn mul_q_power(&self, k: u64) -> Self {
        self * &Self::q_power(self.modulus, k)
    }

    pub fn scale(&self, k: i64) -> Self {
        let k = BigInt::from(k);
        QNumber {
            modulus: self.modulus,
            coeffs: self.coeffs.iter().map(|c| c * &k).collect(),
        }
    }

    /// Exact sign of the real value.
    pub fn signum(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        let mut precision = START_PRECISION;
        loop {
            let (lo, hi) = self.enclosure(precision);
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            precision = precision.saturating_mul(2);
        }
    }

    /// Exact ordering of the real values.
    pub fn compare(&self, other: &Self) -> Result<Ordering, QnumError> {
        self.check(other)?;
        if self.coeffs == other.coeffs {
            return Ok(Ordering::Equal);
        }
        if let Some(ord) = self.compare_small(other) {
            return Ok(ord);
        }
        Ok((self - other).signum())
    }

    /// Integer bounds `lo <= value * 2^p <= hi`.
    fn enclosure(&self, precision: u32) -> (BigInt, BigInt) {
        let table = power_table(self.modulus, precision);
        if let Some(fast) = self.enclosure_i128(&table) {
            return fast;
        }
        let mut centre = BigInt::zero();
        let mut neg = BigInt::zero();
        let mut pos = BigInt::zero();
        for (c, r) in self.coeffs.iter().zip(&table.floors) {
            if c.is_zero() {
                continue;
            }
            centre += c * r;
            if c.is_negative() {
                neg += c;
            } else {
                pos += c;
            }
        }
        (&centre + neg, centre + pos)
    }

    /// Decides the comparison at the starting precision without allocating,
    /// when all coefficients are small.
    fn compare_small(&self, other: &Self) -> Option<Ordering> {
        let table = power_table(self.modulus, START_PRECISION);
        let floors = table.small.as_ref()?;
        let (mut centre, mut neg, mut pos) = (0i128, 0i128, 0i128);
        for ((a, b), &r) in self.coeffs.iter().zip(&other.coeffs).zip(floors) {
            let d = i128::from(a.to_i64()?) - i128::from(b.to_i64()?);
            if d == 0 {
                continue;
            }
            centre = centre.checked_add(d.checked_mul(r)?)?;
            if d < 0 {
                neg += d;
            } else {
                pos += d;
            }
        }
        if centre.checked_add(neg)? > 0 {
            Some(Ordering::Greater)
        } else if centre.checked_add(pos)? < 0 {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    fn enclosure_i128(&self, table: &PowerTable) -> Option<(BigInt, BigInt)> {
        let floors = table.small.as_ref()?;
        let mut centre: i128 = 0;
        let mut neg: i128 = 0;
        let mut pos: i128 = 0;
        for (c, &r) in self.coeffs.iter().zip(floors) {
            let c = c.to_i64()? as i128;
            if c == 0 {
                continue;
            }
            centre = centre.checked_add(c.checked_mul(r)?)?;
            if c < 0 {
                neg += c;
            } else {
                pos += c;
            }
        }
        Some((
            BigInt::from(centre.checked_add(neg)?),
            BigInt::from(centre.checked_add(pos)?),
        ))
    }

    /// Approximate value with relative error at most `rel_error_bound`
    /// (plus the final rounding to `f64`). Reporting only.
    pub fn to_float(&self, rel_error_bound: f64) -> f64 {
        assert!(rel_error_bound > 0.0, "relative error bound must be positive");
        if self.is_zero() {
            return 0.0;
        }
        let mut precision = START_PRECISION;
        loop {
            let (lo, hi) = self.enclosure(precision);
            let same_sign = lo.is_positive() || hi.is_negative();
            if same_sign {
                let width = (&hi - &lo).to_f64().unwrap_or(f64::INFINITY);
                let small = lo.abs().min(hi.abs()).to_f64().unwrap_or(f64::INFINITY);
                if width <= rel_error_bound * small {
                    let mid = BigRational::new(lo + hi, BigInt::one() << (precision + 1));
                    return mid.to_f64().unwrap_or(f64::NAN);
                }
            }
            precision = precision.saturating_mul(2);
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(1e-15)
    }
}

struct PowerTable {
    /// `floor(2^(x/m) * 2^p)` for `x in 0..m`.
    floors: Vec<BigInt>,
    small: Option<Vec<i128>>,
}

fn power_table(m: u32, precision: u32) -> Arc<PowerTable> {
    thread_local! {
        static LAST: std::cell::RefCell<Option<(u32, u32, Arc<PowerTable>)>> = const { std::cell::RefCell::new(None) };
    }
    if let Some(t) = LAST.with(|last| {
        last.borrow()
            .as_ref()
            .filter(|(lm, lp, _)| *lm == m && *lp == precision)
            .map(|(_, _, t)| Arc::clone(t))
    }) {
        return t;
    }
    let table = shared_power_table(m, precision);
    LAST.with(|last| *last.borrow_mut() = Some((m, precision, Arc::clone(&table))));
    table
}

type TableCache = Mutex<HashMap<(u32, u32), Arc<PowerTable>>>;

fn shared_power_table(m: u32, precision: u32) -> Arc<PowerTable> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(m, precision)) {
        return Arc::clone(t);
    }
    let floors: Vec<BigInt> = (0..m)
        .map(|x| {
            // floor((2^(x + p m))^(1/m)) = floor(2^(x/m) 2^p)
            let radicand = BigUint::one() << (u64::from(x) + u64::from(precision) * u64::from(m));
            BigInt::from_biguint(Sign::Plus, radicand.nth_root(m))
        })
        .collect();
    let small = floors.iter().map(|f| f.to_i128()).collect::<Option<Vec<_>>>();
    let table = Arc::new(PowerTable { floors, small });
    cache
        .lock()
        .unwrap()
        .entry((m, precision))
        .or_insert(table)
        .clone()
}

impl fmt::Debug for QNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QNumber(m={}, {:?})", self.modulus, self.coeffs)
    }
}

impl fmt::Display for QNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (x, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match x {
                0 => write!(f, "{c}")?,
                _ => write!(f, "{c}*2^({x}/{})", self.modulus)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl PartialOrd for QNumber {
    /// `None` when the moduli differ.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.compare(other).ok()
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&QNumber> for &QNumber {
            type Output = QNumber;
            /// Panics on modulus mismatch; use the `try_` form to handle it.
            fn $method(self, rhs: &QNumber) -> QNumber {
                self.$inner(rhs).expect("QNumber modulus mismatch")
            }
        }
        impl $trait for QNumber {
            type Output = QNumber;
            fn $method(self, rhs: QNumber) -> QNumber {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &QNumber {
    type Output = QNumber;
    fn neg(self) -> QNumber {
        QNumber {
            modulus: self.modulus,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}
