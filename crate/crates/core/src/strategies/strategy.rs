//! Splitting strategies on `[0, 1]`, generic over the length type.
//!
//! A strategy is stored as its first partition (one interval of length
//! `total`) plus a log of splits. Slot convention: splitting slot `s` puts the
//! left piece back in slot `s` and appends the right piece as a new slot.
//! Lengths are unnormalized; the normalized length of a piece is
//! `len / total`, so every ratio is unaffected by the scale.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::scalar::{Exponent, Length};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("total length must be positive")]
    NonPositiveTotal,
    #[error("split {step}: slot {slot} does not exist ({live} live intervals)")]
    SlotOutOfRange { step: usize, slot: usize, live: usize },
    #[error("split {step}: pieces must be positive")]
    NonPositivePiece { step: usize },
    #[error("split {step}: pieces do not add up to the split interval")]
    SumMismatch { step: usize },
    #[error("stage {t} outside 1..={len}")]
    StageOutOfRange { t: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub slot: usize,
    pub left: T,
    pub right: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strategy<T> {
    total: T,
    splits: Vec<Split<T>>,
}

impl<T: Length> Strategy<T> {
    pub fn trivial(total: T) -> Result<Self, StrategyError> {
        if !total.is_positive_len() {
            return Err(StrategyError::NonPositiveTotal);
        }
        Ok(Strategy {
            total,
            splits: Vec::new(),
        })
    }

    pub fn new(total: T, splits: Vec<Split<T>>) -> Result<Self, StrategyError> {
        let mut s = Self::trivial(total)?;
        let mut live = vec![s.total.clone()];
        for split in splits {
            s.check_split(&live, &split)?;
            live[split.slot] = split.left.clone();
            live.push(split.right.clone());
            s.splits.push(split);
        }
        Ok(s)
    }

    fn check_split(&self, live: &[T], split: &Split<T>) -> Result<(), StrategyError> {
        let step = self.splits.len() + 1;
        let parent = live.get(split.slot).ok_or(StrategyError::SlotOutOfRange {
            step,
            slot: split.slot,
            live: live.len(),
        })?;
        if !split.left.is_positive_len() || !split.right.is_positive_len() {
            return Err(StrategyError::NonPositivePiece { step });
        }
        if !parent.is_sum_of(&split.left, &split.right) {
            return Err(StrategyError::SumMismatch { step });
        }
        Ok(())
    }

    /// Appends one split, validating it against the current last partition.
    pub fn push_split(&mut self, slot: usize, left: T, right: T) -> Result<(), StrategyError> {
        let live = self.slots(self.len());
        let split = Split { slot, left, right };
        self.check_split(&live, &split)?;
        self.splits.push(split);
        Ok(())
    }

    /// Number of partitions `n` (the strategy has length `n`).
    pub fn len(&self) -> usize {
        self.splits.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total(&self) -> &T {
        &self.total
    }

    pub fn splits(&self) -> &[Split<T>] {
        &self.splits
    }

    /// Live lengths of partition `t` (1-based) in slot order.
    pub fn slots(&self, t: usize) -> Vec<T> {
        let mut live = Vec::with_capacity(t);
        live.push(self.total.clone());
        for split in &self.splits[..t.saturating_sub(1).min(self.splits.len())] {
            live[split.slot] = split.left.clone();
            live.push(split.right.clone());
        }
        live
    }

    /// Partition `I_t` (1-based), sorted increasingly.
    pub fn partition(&self, t: usize) -> Result<Vec<T>, StrategyError> {
        if t == 0 || t > self.len() {
            return Err(StrategyError::StageOutOfRange { t, len: self.len() });
        }
        let mut lengths = self.slots(t);
        lengths.sort_by(|a, b| a.cmp_len(b));
        Ok(lengths)
    }

    /// Partition `I_t` normalized to sum 1, as floats.
    pub fn normalized_partition(&self, t: usize) -> Result<Vec<f64>, StrategyError> {
        Ok(self
            .partition(t)?
            .iter()
            .map(|x| x.ratio_f64(&self.total))
            .collect())
    }

    /// `(max, min)` length of every stage `I_1..I_n`, computed incrementally.
    pub fn stage_extremes(&self) -> Vec<(T, T)> {
        let mut live = vec![self.total.clone()];
        let mut multiset: BTreeMap<Key<T>, usize> = BTreeMap::new();
        multiset.insert(Key(self.total.clone()), 1);
        let mut out = Vec::with_capacity(self.len());
        out.push((self.total.clone(), self.total.clone()));
        for split in &self.splits {
            let parent = std::mem::replace(&mut live[split.slot], split.left.clone());
            remove_one(&mut multiset, parent);
            *multiset.entry(Key(split.left.clone())).or_default() += 1;
            *multiset.entry(Key(split.right.clone())).or_default() += 1;
            live.push(split.right.clone());
            let max = multiset.keys().next_back().unwrap().0.clone();
            let min = multiset.keys().next().unwrap().0.clone();
            out.push((max, min));
        }
        out
    }

    /// `disc(I_t)` for every stage.
    pub fn stage_discs(&self) -> Vec<f64> {
        self.stage_extremes()
            .iter()
            .map(|(max, min)| max.ratio_f64(min))
            .collect()
    }

    /// `disc(S) = max_t disc(I_t)`.
    pub fn disc_of(&self) -> f64 {
        self.stage_discs().into_iter().fold(1.0, f64::max)
    }

    /// `disc_t(S) = max_{s <= t} disc(I_s)`.
    pub fn disc_prefix(&self, t: usize) -> Result<f64, StrategyError> {
        if t == 0 || t > self.len() {
            return Err(StrategyError::StageOutOfRange { t, len: self.len() });
        }
        let truncated = Strategy {
            total: self.total.clone(),
            splits: self.splits[..t - 1].to_vec(),
        };
        Ok(truncated.disc_of())
    }

    /// Running prefix discrepancies `disc_1(S), ..., disc_n(S)`.
    pub fn prefix_discs(&self) -> Vec<f64> {
        let mut running = 1.0f64;
        self.stage_discs()
            .into_iter()
            .map(|d| {
                running = running.max(d);
                running
            })
            .collect()
    }

    /// Compares `disc(S)` against `2^exp`, exactly when the length type allows.
    pub fn disc_cmp(&self, exp: Exponent) -> Ordering {
        self.stage_extremes()
            .iter()
            .map(|(max, min)| max.cmp_scaled(min, exp))
            .max()
            .unwrap_or(Ordering::Less)
    }

    pub fn map<U: Length>(&self, f: impl Fn(&T) -> U) -> Strategy<U> {
        Strategy {
            total: f(&self.total),
            splits: self
                .splits
                .iter()
                .map(|s| Split {
                    slot: s.slot,
                    left: f(&s.left),
                    right: f(&s.right),
                })
                .collect(),
        }
    }
}

fn remove_one<T: Length>(multiset: &mut BTreeMap<Key<T>, usize>, value: T) {
    let key = Key(value);
    let count = multiset.get_mut(&key).expect("live length tracked");
    *count -= 1;
    if *count == 0 {
        multiset.remove(&key);
    }
}

#[derive(Debug, Clone)]
struct Key<T>(T);

impl<T: Length> PartialEq for Key<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Length> Eq for Key<T> {}

impl<T: Length> PartialOrd for Key<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Length> Ord for Key<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_len(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_stage_example_has_disc_sqrt2() {
        // ({[0,1]}, {[0,x],[x,1]}, {[0,x/2],[x/2,x],[x,1]}) with x = 2 - sqrt2.
        let x = 2.0 - std::f64::consts::SQRT_2;
        let s = Strategy::new(
            1.0,
            vec![
                Split { slot: 0, left: x, right: 1.0 - x },
                Split { slot: 0, left: x / 2.0, right: x / 2.0 },
            ],
        )
        .unwrap();
        assert_eq!(s.len(), 3);
        assert!((s.disc_of() - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(s.disc_prefix(1).unwrap(), 1.0);
        assert!(s.disc_prefix(4).is_err());
    }

    #[test]
    fn slot_convention() {
        let s = Strategy::new(
            8.0,
            vec![
                Split { slot: 0, left: 5.0, right: 3.0 },
                Split { slot: 1, left: 1.0, right: 2.0 },
            ],
        )
        .unwrap();
        assert_eq!(s.slots(3), vec![5.0, 1.0, 2.0]);
        assert_eq!(s.partition(3).unwrap(), vec![1.0, 2.0, 5.0]);
        assert_eq!(s.normalized_partition(2).unwrap(), vec![0.375, 0.625]);
        assert_eq!(s.stage_extremes()[2], (5.0, 1.0));
    }

    #[test]
    fn invalid_splits_are_rejected() {
        let bad_slot = Strategy::new(1.0, vec![Split { slot: 1, left: 0.5, right: 0.5 }]);
        assert!(matches!(bad_slot, Err(StrategyError::SlotOutOfRange { .. })));
        let bad_sum = Strategy::new(1.0, vec![Split { slot: 0, left: 0.5, right: 0.6 }]);
        assert!(matches!(bad_sum, Err(StrategyError::SumMismatch { .. })));
        let bad_piece = Strategy::new(1.0, vec![Split { slot: 0, left: 1.0, right: 0.0 }]);
        assert!(matches!(bad_piece, Err(StrategyError::NonPositivePiece { .. })));
        assert!(Strategy::trivial(0.0).is_err());
        let mut s = Strategy::trivial(1.0).unwrap();
        s.push_split(0, 0.25, 0.75).unwrap();
        assert!(s.push_split(2, 0.1, 0.1).is_err());
    }

    #[test]
    fn disc_cmp_against_power_of_two() {
        let s = Strategy::new(3.0f64, vec![Split { slot: 0, left: 1.0, right: 2.0 }]).unwrap();
        assert_eq!(s.disc_cmp(Exponent::new(1, 1)), Ordering::Equal);
        assert_eq!(s.disc_cmp(Exponent::new(1, 2)), Ordering::Greater);
        assert_eq!(s.prefix_discs(), vec![1.0, 2.0]);
    }

    #[test]
    fn generic_over_f32() {
        let s = Strategy::new(1.0f32, vec![Split { slot: 0, left: 0.5, right: 0.5 }]).unwrap();
        assert_eq!(s.disc_of(), 1.0);
        let wide: Strategy<f64> = s.map(|&x| f64::from(x));
        assert_eq!(wide.partition(2).unwrap(), vec![0.5, 0.5]);
    }
}
