//! Baskets and basket collections.
//!
//! A basket is a multiset on `{0, ..., m-1}` in which every value appears at
//! most twice. Its length is `sum 2^(x/m)` over its elements. Baskets are
//! ordered by size first and then lexicographically on their sorted listing.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qnum::QNumber;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BasketError {
    #[error("order n must be at least 1")]
    ZeroOrder,
    #[error("element {element} outside 0..{modulus}")]
    OutOfRange { element: u32, modulus: u32 },
    #[error("element {element} appears {count} times (at most 2 allowed)")]
    Multiplicity { element: u32, count: usize },
    #[error("baskets over different moduli ({0} vs {1})")]
    ModulusMismatch(u32, u32),
    #[error("cyclic interval length {h} must lie in 1..={m}")]
    IntervalLength { h: u32, m: u32 },
}

/// `m = ceil(n/2)`.
pub fn modulus_for(n: u32) -> u32 {
    n.div_ceil(2)
}

/// How many copies of `x` exist in the initial collection of order `n`.
pub fn full_multiplicity(n: u32, x: u32) -> usize {
    let m = modulus_for(n);
    if n % 2 == 1 && x == m - 1 {
        1
    } else {
        2
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basket {
    modulus: u32,
    elements: Vec<u32>,
}

impl Basket {
    /// Validates range and multiplicity; sorts the elements.
    pub fn new(modulus: u32, mut elements: Vec<u32>) -> Result<Self, BasketError> {
        elements.sort_unstable();
        if let Some(&bad) = elements.iter().find(|&&x| x >= modulus) {
            return Err(BasketError::OutOfRange {
                element: bad,
                modulus,
            });
        }
        for run in elements.chunk_by(|a, b| a == b) {
            if run.len() > 2 {
                return Err(BasketError::Multiplicity {
                    element: run[0],
                    count: run.len(),
                });
            }
        }
        Ok(Basket { modulus, elements })
    }

    pub fn singleton(modulus: u32, x: u32) -> Result<Self, BasketError> {
        Self::new(modulus, vec![x])
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Weakly increasing element listing.
    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// Multiplicity of every value `0..m`.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.modulus as usize];
        for &x in &self.elements {
            counts[x as usize] += 1;
        }
        counts
    }

    /// Multiset union.
    pub fn union(&self, other: &Basket) -> Result<Basket, BasketError> {
        if self.modulus != other.modulus {
            return Err(BasketError::ModulusMismatch(self.modulus, other.modulus));
        }
        let mut elements = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            if self.elements[i] <= other.elements[j] {
                elements.push(self.elements[i]);
                i += 1;
            } else {
                elements.push(other.elements[j]);
                j += 1;
            }
        }
        elements.extend_from_slice(&self.elements[i..]);
        elements.extend_from_slice(&other.elements[j..]);
        Basket::new(self.modulus, elements)
    }

    /// True iff the basket holds both `0` and `m-1`.
    pub fn is_wrapped(&self) -> bool {
        self.contains(0) && self.contains(self.modulus - 1)
    }

    /// Exact length `sum 2^(x/m)`.
    pub fn length(&self) -> QNumber {
        let coeffs = self.counts().into_iter().map(BigInt::from).collect();
        QNumber::from_reduced(self.modulus, coeffs).expect("counts vector has m entries")
    }
}

/// Size first, then lexicographic on the sorted listing.
pub fn lex_compare(b1: &Basket, b2: &Basket) -> Ordering {
    b1.len()
        .cmp(&b2.len())
        .then_with(|| b1.elements.cmp(&b2.elements))
}

impl Ord for Basket {
    fn cmp(&self, other: &Self) -> Ordering {
        lex_compare(self, other).then_with(|| self.modulus.cmp(&other.modulus))
    }
}

impl PartialOrd for Basket {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Basket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Basket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// `ell(B)` for a basket.
pub fn basket_length(b: &Basket) -> QNumber {
    b.length()
}

/// The cyclic interval `I_h(a)`: `a, a, a+1, a+1, ..., a+h-1, a+h-1` modulo
/// `m`, where `m-1` appears once when `n` is odd.
pub fn cyclic_interval(n: u32, a: i64, h: u32) -> Result<Basket, BasketError> {
    if n == 0 {
        return Err(BasketError::ZeroOrder);
    }
    let m = modulus_for(n);
    if h == 0 || h > m {
        return Err(BasketError::IntervalLength { h, m });
    }
    let start = a.rem_euclid(i64::from(m)) as u32;
    let mut elements = Vec::with_capacity(2 * h as usize);
    for j in 0..h {
        let x = (start + j) % m;
        for _ in 0..full_multiplicity(n, x) {
            elements.push(x);
        }
    }
    Basket::new(m, elements)
}

/// Shape of a basket relative to the cyclic intervals of order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    /// `B = I_h(a)`; `a` is the start of the cyclic run (`0` for the full circle).
    CyclicallyOrdered { a: u32, h: u32 },
    /// A single element that is not itself a cyclic interval.
    Singleton,
    NotCyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub shape: Shape,
    pub wrapped: bool,
}

impl Classification {
    /// Cyclically ordered in the lemma's sense: a singleton or some `I_h(a)`.
    pub fn is_cyclically_ordered(&self) -> bool {
        !matches!(self.shape, Shape::NotCyclic)
    }
}

pub fn classify(n: u32, b: &Basket) -> Classification {
    let wrapped = !b.is_empty() && b.is_wrapped();
    let shape = cyclic_shape(n, b).unwrap_or(if b.len() == 1 {
        Shape::Singleton
    } else {
        Shape::NotCyclic
    });
    Classification { shape, wrapped }
}

fn cyclic_shape(n: u32, b: &Basket) -> Option<Shape> {
    let m = modulus_for(n);
    if b.modulus() != m || b.is_empty() {
        return None;
    }
    let counts = b.counts();
    let full = (0..m).all(|x| counts[x as usize] == full_multiplicity(n, x));
    if full {
        return Some(Shape::CyclicallyOrdered { a: 0, h: m });
    }
    let present = |x: u32| counts[x as usize] > 0;
    let mut starts = (0..m).filter(|&x| present(x) && !present((x + m - 1) % m));
    let a = starts.next()?;
    if starts.next().is_some() {
        return None;
    }
    let h = counts.iter().filter(|&&c| c > 0).count() as u32;
    let candidate = cyclic_interval(n, i64::from(a), h).ok()?;
    (candidate == *b).then_some(Shape::CyclicallyOrdered { a, h })
}

/// One stage of lex-merge: baskets sorted by the lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasketCollection {
    pub n: u32,
    pub m: u32,
    pub stage: u32,
    pub baskets: Vec<Basket>,
}

impl BasketCollection {
    pub fn len(&self) -> usize {
        self.baskets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.baskets.is_empty()
    }

    /// Sum of all basket lengths.
    pub fn total_length(&self) -> QNumber {
        self.baskets
            .iter()
            .fold(QNumber::zero(self.m), |acc, b| &acc + &b.length())
    }

    /// Multiplicity of each value over the whole collection.
    pub fn element_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.m as usize];
        for b in &self.baskets {
            for &x in b.elements() {
                counts[x as usize] += 1;
            }
        }
        counts
    }

    pub fn is_sorted(&self) -> bool {
        self.baskets.windows(2).all(|w| lex_compare(&w[0], &w[1]) != Ordering::Greater)
    }
}

impl fmt::Display for BasketCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, b) in self.baskets.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "}}")
    }
}

/// `B_0`: two singletons of each value below `m-1`, and one or two of `m-1`
/// depending on the parity of `n`.
pub fn initial_collection(n: u32) -> Result<BasketCollection, BasketError> {
    if n == 0 {
        return Err(BasketError::ZeroOrder);
    }
    let m = modulus_for(n);
    let mut baskets = Vec::with_capacity(n as usize);
    for x in 0..m {
        for _ in 0..full_multiplicity(n, x) {
            baskets.push(Basket::singleton(m, x)?);
        }
    }
    debug_assert_eq!(baskets.len(), n as usize);
    Ok(BasketCollection {
        n,
        m,
        stage: 0,
        baskets,
    })
}

/// `X_j = [floor((j-1)/2)]`, the `j`-th singleton of `B_0` (1-based).
pub fn initial_singleton(n: u32, j: u32) -> u32 {
    debug_assert!(j >= 1 && j <= n);
    (j - 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(m: u32, xs: &[u32]) -> Basket {
        Basket::new(m, xs.to_vec()).unwrap()
    }

    #[test]
    fn initial_collections() {
        assert_eq!(initial_collection(7).unwrap().to_string(), "{[0],[0],[1],[1],[2],[2],[3]}");
        assert_eq!(initial_collection(4).unwrap().to_string(), "{[0],[0],[1],[1]}");
        assert_eq!(initial_collection(1).unwrap().to_string(), "{[0]}");
        assert_eq!(initial_collection(0), Err(BasketError::ZeroOrder));
    }

    #[test]
    fn lexicographic_order() {
        assert_eq!(lex_compare(&b(4, &[3]), &b(4, &[0, 0])), Ordering::Less);
        assert_eq!(lex_compare(&b(4, &[0, 0, 3]), &b(4, &[1, 1, 2, 2])), Ordering::Less);
        assert_eq!(lex_compare(&b(4, &[1, 1]), &b(4, &[1, 1])), Ordering::Equal);
        assert_eq!(lex_compare(&b(4, &[1, 1]), &b(4, &[0, 2])), Ordering::Greater);
    }

    #[test]
    fn basket_validation() {
        assert_eq!(
            Basket::new(4, vec![1, 1, 1]),
            Err(BasketError::Multiplicity { element: 1, count: 3 })
        );
        assert_eq!(
            Basket::new(4, vec![4]),
            Err(BasketError::OutOfRange { element: 4, modulus: 4 })
        );
        assert_eq!(b(4, &[3, 0, 0]).elements(), &[0, 0, 3]);
        assert!(b(4, &[1, 1]).union(&b(4, &[1])).is_err());
        assert!(b(4, &[1]).union(&b(5, &[1])).is_err());
    }

    #[test]
    fn cyclic_intervals() {
        assert_eq!(cyclic_interval(9, 2, 4).unwrap(), b(5, &[2, 2, 3, 3, 4, 0, 0]));
        assert_eq!(cyclic_interval(10, 2, 4).unwrap(), b(5, &[2, 2, 3, 3, 4, 4, 0, 0]));
        assert_eq!(cyclic_interval(8, 0, 1).unwrap(), b(4, &[0, 0]));
        assert_eq!(cyclic_interval(8, -1, 2).unwrap(), b(4, &[3, 3, 0, 0]));
        assert!(cyclic_interval(8, 0, 5).is_err());
        assert!(cyclic_interval(8, 0, 0).is_err());
    }

    #[test]
    fn classification() {
        let c = classify(7, &b(4, &[0, 0, 3]));
        assert_eq!(c.shape, Shape::CyclicallyOrdered { a: 3, h: 2 });
        assert!(c.wrapped);
        let c = classify(7, &b(4, &[1, 1, 2, 2]));
        assert_eq!(c.shape, Shape::CyclicallyOrdered { a: 1, h: 2 });
        assert!(!c.wrapped);
        assert_eq!(classify(8, &b(4, &[0, 0, 2, 2])).shape, Shape::NotCyclic);
        assert_eq!(classify(8, &b(4, &[1])).shape, Shape::Singleton);
        assert_eq!(classify(7, &b(4, &[3])).shape, Shape::CyclicallyOrdered { a: 3, h: 1 });
        assert_eq!(
            classify(7, &b(4, &[0, 0, 1, 1, 2, 2, 3])).shape,
            Shape::CyclicallyOrdered { a: 0, h: 4 }
        );
        // m-1 doubled is not cyclic for odd n.
        assert_eq!(classify(7, &b(4, &[3, 3])).shape, Shape::NotCyclic);
        assert_eq!(classify(8, &b(4, &[0, 1])).shape, Shape::NotCyclic);
    }

    #[test]
    fn lengths() {
        assert_eq!(basket_length(&b(4, &[0])), QNumber::one(4));
        let l = basket_length(&b(4, &[0, 0, 3]));
        assert_eq!(l, QNumber::from_i64s(4, &[2, 0, 0, 1]).unwrap());
        assert!((l.to_f64() - (2.0 + 2f64.powf(0.75))).abs() < 1e-12);
        for m in 1..10 {
            assert_eq!(basket_length(&b(m, &[m - 1])), QNumber::q_power(m, u64::from(m - 1)));
        }
    }

    #[test]
    fn union_keeps_order() {
        assert_eq!(b(4, &[3]).union(&b(4, &[0, 0])).unwrap(), b(4, &[0, 0, 3]));
    }
}
