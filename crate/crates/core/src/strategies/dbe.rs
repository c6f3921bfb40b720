//! The de Bruijn–Erdős point sequence `x_k = log2(2k - 1) mod 1` and the
//! conversion of circle points into a splitting strategy.

use std::collections::BTreeMap;

use num_traits::{Float, ToPrimitive};
use thiserror::Error;

use super::strategy::{Strategy, StrategyError};
use crate::scalar::Length;

/// Gaps shorter than this mean the float precision is exhausted.
pub const MIN_GAP: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DbeError {
    #[error("no points")]
    Empty,
    #[error("point {index} ({value}) is outside [0, 1)")]
    OutOfRange { index: usize, value: f64 },
    #[error("point {index} collides with an existing point (gap {gap:e})")]
    Collision { index: usize, gap: f64 },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Points on the circle `[0, 1)` in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePointSet<T> {
    points: Vec<T>,
}

impl<T: Float> CirclePointSet<T> {
    pub fn new(points: Vec<T>) -> Result<Self, DbeError> {
        for (index, p) in points.iter().enumerate() {
            if !(*p >= T::zero() && *p < T::one()) {
                return Err(DbeError::OutOfRange { index, value: ToPrimitive::to_f64(p).unwrap_or(f64::NAN) });
            }
        }
        Ok(CirclePointSet { points })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `log2(v) mod 1` for a positive integer `v`, computed as the logarithm of the
/// mantissa so no integer part is subtracted.
fn frac_log2<T: Float>(v: u64) -> T {
    let e = 63 - v.leading_zeros();
    let mantissa = T::from(v).unwrap() / T::from(1u64 << e).unwrap();
    mantissa.log2()
}

/// First `n` points of the de Bruijn–Erdős sequence.
pub fn dbe_points<T: Float>(n: u32) -> CirclePointSet<T> {
    let points = (1..=u64::from(n)).map(|k| frac_log2(2 * k - 1)).collect();
    CirclePointSet { points }
}

/// Cuts the circle at the first point and splits one gap per further point.
///
/// The gap starting at each point keeps a slot; a new point splits the gap it
/// lands in, the left piece keeping that gap's slot.
pub fn strategy_from_points<T: Float + Length>(p: &CirclePointSet<T>) -> Result<Strategy<T>, DbeError> {
    let first = *p.points.first().ok_or(DbeError::Empty)?;
    let mut gaps: BTreeMap<u64, (T, usize)> = BTreeMap::new();
    // Non-negative floats order the same way as their bit patterns.
    let key = |x: T| ToPrimitive::to_f64(&x).unwrap().to_bits();
    gaps.insert(key(T::zero()), (T::zero(), 0));
    let mut strategy = Strategy::trivial(T::one())?;
    let min_gap = T::from(MIN_GAP).unwrap();
    for (index, &x) in p.points.iter().enumerate().skip(1) {
        let mut r = x - first;
        if r < T::zero() {
            r = r + T::one();
        }
        let k = key(r);
        let (pred, slot) = *gaps.range(..=k).next_back().map(|(_, v)| v).unwrap();
        let succ = gaps.range(k..).next().map(|(_, v)| v.0).unwrap_or(T::one());
        let left = r - pred;
        let right = succ - r;
        let gap = left.min(right);
        if gap < min_gap {
            return Err(DbeError::Collision { index, gap: ToPrimitive::to_f64(&gap).unwrap_or(0.0) });
        }
        strategy.push_split(slot, left, right)?;
        gaps.insert(k, (r, strategy.len() - 1));
    }
    Ok(strategy)
}
