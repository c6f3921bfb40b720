//! The lex-merge engine.
//!
//! Starting from `B_0`, repeatedly replace the two smallest baskets (in the
//! size-then-lexicographic order) by their multiset union. Read backwards,
//! the sequence of collections is a splitting strategy on `[0, 1]` once every
//! length is divided by the (stage-independent) total `L`.
//!
//! All discrepancy decisions are exact: ratios are compared by
//! cross-multiplication in `Z[2^(1/m)]`.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baskets::{initial_collection, lex_compare, Basket, BasketCollection, BasketError};
use crate::qnum::QNumber;
use crate::strategies::strategy::{Split, Strategy, StrategyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexMergeError {
    #[error(transparent)]
    Basket(#[from] BasketError),
    #[error("cannot merge a collection with fewer than two baskets")]
    SingletonCollection,
    #[error("collection is empty")]
    EmptyCollection,
    #[error("trace is inconsistent: {0}")]
    InvalidTrace(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Placement of the merged basket among identical baskets already present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Older baskets first: the merged basket goes after its equals.
    #[default]
    CreationOrder,
    /// The merged basket goes before its equals.
    Reversed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    /// Index `i` of the collection the merge is applied to.
    pub stage: u32,
    pub left_index: usize,
    pub right_index: usize,
    pub left: Basket,
    pub right: Basket,
    pub result: Basket,
}

/// Exact maximum- and minimum-length baskets of one collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscWitness {
    pub max_index: usize,
    pub min_index: usize,
    pub max_length: QNumber,
    pub min_length: QNumber,
}

impl DiscWitness {
    /// Three-way comparison of `max/min` against `target`, via
    /// `ell(max)` vs `target * ell(min)`.
    pub fn ratio_vs(&self, target: &QNumber) -> Ordering {
        self.max_length
            .compare(&(target * &self.min_length))
            .expect("witness and target share the modulus")
    }

    /// Compares `self.max/self.min` with `other.max/other.min`.
    pub fn cmp_ratio(&self, other: &DiscWitness) -> Ordering {
        let lhs = &self.max_length * &other.min_length;
        let rhs = &other.max_length * &self.min_length;
        lhs.compare(&rhs).expect("same modulus")
    }

    pub fn ratio_f64(&self) -> f64 {
        self.max_length.to_float(1e-16) / self.min_length.to_float(1e-16)
    }
}

/// Finds the exact extreme-length baskets (first occurrence on ties).
pub fn disc_exact(c: &BasketCollection) -> Result<DiscWitness, LexMergeError> {
    let lengths: Vec<QNumber> = c.baskets.iter().map(Basket::length).collect();
    disc_of_lengths(&lengths)
}

pub(crate) fn disc_of_lengths(lengths: &[QNumber]) -> Result<DiscWitness, LexMergeError> {
    let first = lengths.first().ok_or(LexMergeError::EmptyCollection)?;
    let (mut max_index, mut min_index) = (0, 0);
    let (mut max, mut min) = (first, first);
    for (i, len) in lengths.iter().enumerate().skip(1) {
        if len.compare(max).expect("same modulus") == Ordering::Greater {
            max = len;
            max_index = i;
        }
        if len.compare(min).expect("same modulus") == Ordering::Less {
            min = len;
            min_index = i;
        }
    }
    Ok(DiscWitness {
        max_index,
        min_index,
        max_length: max.clone(),
        min_length: min.clone(),
    })
}

/// One merge: removes the two smallest baskets and inserts their union.
pub fn merge_step(c: &BasketCollection) -> Result<(BasketCollection, MergeRecord), LexMergeError> {
    merge_step_with(c, TieBreak::CreationOrder)
}

pub fn merge_step_with(
    c: &BasketCollection,
    tie: TieBreak,
) -> Result<(BasketCollection, MergeRecord), LexMergeError> {
    if c.len() < 2 {
        return Err(LexMergeError::SingletonCollection);
    }
    let mut baskets = c.baskets.clone();
    if !c.is_sorted() {
        baskets.sort_by(lex_compare);
    }
    let rest = baskets.split_off(2);
    let (left, right) = (baskets[0].clone(), baskets[1].clone());
    let merged = left.union(&right)?;
    let mut next = rest;
    let at = match tie {
        TieBreak::CreationOrder => {
            next.partition_point(|b| lex_compare(b, &merged) != Ordering::Greater)
        }
        TieBreak::Reversed => next.partition_point(|b| lex_compare(b, &merged) == Ordering::Less),
    };
    next.insert(at, merged.clone());
    let record = MergeRecord {
        stage: c.stage,
        left_index: 0,
        right_index: 1,
        left,
        right,
        result: merged,
    };
    Ok((
        BasketCollection {
            n: c.n,
            m: c.m,
            stage: c.stage + 1,
            baskets: next,
        },
        record,
    ))
}

/// A full lex-merge run `B_0, ..., B_{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub n: u32,
    pub m: u32,
    pub collections: Vec<BasketCollection>,
    pub merges: Vec<MergeRecord>,
    pub discs: Vec<DiscWitness>,
}

impl Trace {
    /// Assembles a trace from collections, recomputing merge records and
    /// exact discrepancy witnesses. Used for externally supplied traces; the
    /// merge records describe what changed between adjacent collections.
    pub fn from_collections(collections: Vec<BasketCollection>) -> Result<Self, LexMergeError> {
        let first = collections.first().ok_or(LexMergeError::EmptyCollection)?;
        let (n, m) = (first.n, first.m);
        let discs = collections
            .iter()
            .map(disc_exact)
            .collect::<Result<Vec<_>, _>>()?;
        let merges = collections
            .windows(2)
            .map(|w| infer_merge(&w[0], &w[1]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trace {
            n,
            m,
            collections,
            merges,
            discs,
        })
    }

    /// `q^(m-1) = 2^(1 - 1/m)`, the value lex-merge attains.
    pub fn target(&self) -> QNumber {
        QNumber::q_power(self.m, u64::from(self.m - 1))
    }

    /// Stage with the largest exact discrepancy (earliest on ties).
    pub fn max_disc_stage(&self) -> usize {
        let mut best = 0;
        for (i, d) in self.discs.iter().enumerate().skip(1) {
            if d.cmp_ratio(&self.discs[best]) == Ordering::Greater {
                best = i;
            }
        }
        best
    }

    /// `disc(LM_n)` compared with `2^(1-1/m)`.
    pub fn disc_vs_target(&self) -> Ordering {
        self.discs[self.max_disc_stage()].ratio_vs(&self.target())
    }

    /// The total `L`.
    pub fn total_length(&self) -> QNumber {
        self.collections[0].total_length()
    }

    pub fn disc_f64(&self) -> f64 {
        self.discs[self.max_disc_stage()].ratio_f64()
    }
}

/// The merge that turns `before` into `after`, if `after` differs from
/// `before` by replacing two baskets with their union.
fn infer_merge(before: &BasketCollection, after: &BasketCollection) -> Result<MergeRecord, LexMergeError> {
    let bad = |msg: String| LexMergeError::InvalidTrace(msg);
    if after.len() + 1 != before.len() {
        return Err(bad(format!(
            "stage {} has {} baskets, stage {} has {}",
            before.stage,
            before.len(),
            after.stage,
            after.len()
        )));
    }
    let mut remaining: HashMap<&Basket, isize> = HashMap::new();
    for b in &before.baskets {
        *remaining.entry(b).or_default() += 1;
    }
    let mut added = Vec::new();
    for b in &after.baskets {
        match remaining.get_mut(b) {
            Some(k) if *k > 0 => *k -= 1,
            _ => added.push(b.clone()),
        }
    }
    let mut removed: Vec<Basket> = Vec::new();
    for (b, k) in remaining {
        for _ in 0..k {
            removed.push(b.clone());
        }
    }
    removed.sort_by(lex_compare);
    if added.len() != 1 || removed.len() != 2 {
        return Err(bad(format!(
            "stage {} -> {}: expected one merge, found {} removed and {} added baskets",
            before.stage,
            after.stage,
            removed.len(),
            added.len()
        )));
    }
    let index_of = |target: &Basket| before.baskets.iter().position(|b| b == target).unwrap_or(usize::MAX);
    let left_index = index_of(&removed[0]);
    let mut right_index = index_of(&removed[1]);
    if removed[0] == removed[1] {
        right_index = before.baskets[left_index + 1..]
            .iter()
            .position(|b| *b == removed[1])
            .map_or(usize::MAX, |p| p + left_index + 1);
    }
    Ok(MergeRecord {
        stage: before.stage,
        left_index,
        right_index,
        left: removed[0].clone(),
        right: removed[1].clone(),
        result: added.pop().unwrap(),
    })
}

/// Runs `LM_n`.
pub fn run(n: u32) -> Result<Trace, LexMergeError> {
    run_with(n, TieBreak::CreationOrder)
}

pub fn run_with(n: u32, tie: TieBreak) -> Result<Trace, LexMergeError> {
    let mut current = initial_collection(n)?;
    let m = current.m;
    let mut collections = Vec::with_capacity(n as usize);
    let mut merges = Vec::with_capacity(n as usize - 1);
    let mut discs = Vec::with_capacity(n as usize);
    // Lengths are carried alongside the baskets so each is computed once.
    let mut lengths: Vec<QNumber> = current.baskets.iter().map(Basket::length).collect();
    loop {
        discs.push(disc_of_lengths(&lengths)?);
        if current.len() < 2 {
            collections.push(current);
            break;
        }
        let (next, record) = merge_step_with(&current, tie)?;
        let merged_len = &lengths[0] + &lengths[1];
        lengths.drain(..2);
        // Equal baskets have equal lengths, so any equal position keeps the
        // two vectors aligned.
        let at = next
            .baskets
            .iter()
            .position(|b| *b == record.result)
            .expect("merged basket present");
        lengths.insert(at, merged_len);
        collections.push(std::mem::replace(&mut current, next));
        merges.push(record);
    }
    Ok(Trace {
        n,
        m,
        collections,
        merges,
        discs,
    })
}

/// The splitting strategy obtained by reading the trace backwards:
/// `I_t` holds the lengths of `B_{n-t}` and the step `I_t -> I_{t+1}` splits
/// `ell(M)` into `ell(B_1)` and `ell(B_2)` of the corresponding merge.
pub fn to_strategy(t: &Trace) -> Result<Strategy<QNumber>, LexMergeError> {
    let total = t.total_length();
    let last = t.collections.last().ok_or(LexMergeError::EmptyCollection)?;
    if last.len() != 1 {
        return Err(LexMergeError::InvalidTrace("final collection is not a single basket".into()));
    }
    let mut slot_of: HashMap<Basket, Vec<usize>> = HashMap::new();
    slot_of.entry(last.baskets[0].clone()).or_default().push(0);
    let mut splits = Vec::with_capacity(t.merges.len());
    for record in t.merges.iter().rev() {
        let slot = slot_of
            .get_mut(&record.result)
            .and_then(Vec::pop)
            .ok_or_else(|| LexMergeError::InvalidTrace(format!("merge at stage {} has no source", record.stage)))?;
        slot_of.entry(record.left.clone()).or_default().push(slot);
        slot_of.entry(record.right.clone()).or_default().push(splits.len() + 1);
        splits.push(Split {
            slot,
            left: record.left.length(),
            right: record.right.length(),
        });
    }
    Ok(Strategy::new(total, splits)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coll(n: u32, stage: u32, baskets: &[&[u32]]) -> BasketCollection {
        let m = n.div_ceil(2);
        BasketCollection {
            n,
            m,
            stage,
            baskets: baskets.iter().map(|b| Basket::new(m, b.to_vec()).unwrap()).collect(),
        }
    }

    #[test]
    fn merge_steps_from_the_lm7_trace() {
        let b0 = initial_collection(7).unwrap();
        let (b1, rec) = merge_step(&b0).unwrap();
        assert_eq!(b1.to_string(), "{[1],[1],[2],[2],[3],[0,0]}");
        assert_eq!(rec.result.to_string(), "[0,0]");
        assert_eq!((rec.left_index, rec.right_index), (0, 1));

        let b4 = coll(7, 4, &[&[1, 1], &[2, 2], &[0, 0, 3]]);
        let (b5, _) = merge_step(&b4).unwrap();
        assert_eq!(b5.to_string(), "{[0,0,3],[1,1,2,2]}");

        let two = initial_collection(2).unwrap();
        let (one, _) = merge_step(&two).unwrap();
        assert_eq!(one.to_string(), "{[0,0]}");
        assert_eq!(merge_step(&one), Err(LexMergeError::SingletonCollection));
    }

    #[test]
    fn small_runs() {
        let t = run(1).unwrap();
        assert_eq!(t.collections.len(), 1);
        assert!(t.merges.is_empty());
        assert_eq!(t.disc_vs_target(), Ordering::Equal);

        let t = run(2).unwrap();
        assert_eq!(t.collections[0].to_string(), "{[0],[0]}");
        assert_eq!(t.collections[1].to_string(), "{[0,0]}");
    }

    #[test]
    fn disc_witnesses_on_lm7() {
        let t = run(7).unwrap();
        let q3 = QNumber::q_power(4, 3);
        let d0 = disc_exact(&t.collections[0]).unwrap();
        assert_eq!(t.collections[0].baskets[d0.max_index].to_string(), "[3]");
        assert_eq!(t.collections[0].baskets[d0.min_index].to_string(), "[0]");
        assert_eq!(d0.ratio_vs(&q3), Ordering::Equal);
        assert_eq!(t.discs[6].ratio_vs(&QNumber::one(4)), Ordering::Equal);
        // B_1: max [0,0] = 2, min [1] = q, and 2/q = q^3 exactly.
        assert_eq!(t.discs[1].ratio_vs(&q3), Ordering::Equal);
    }

    #[test]
    fn strategy_from_lm2_and_lm7() {
        let s = to_strategy(&run(2).unwrap()).unwrap();
        assert_eq!(s.total(), &QNumber::from_i64s(1, &[2]).unwrap());
        assert_eq!(s.normalized_partition(2).unwrap(), vec![0.5, 0.5]);

        let t = run(7).unwrap();
        let s = to_strategy(&t).unwrap();
        assert_eq!(s.len(), 7);
        let i2 = s.partition(2).unwrap();
        let a = Basket::new(4, vec![0, 0, 3]).unwrap().length();
        let b = Basket::new(4, vec![1, 1, 2, 2]).unwrap().length();
        assert_eq!(i2, vec![a, b]);
        for step in 1..=7 {
            let sum = s
                .partition(step)
                .unwrap()
                .iter()
                .fold(QNumber::zero(4), |acc, x| &acc + x);
            assert_eq!(&sum, s.total());
        }
    }

    #[test]
    fn trace_reconstruction_from_collections() {
        let t = run(9).unwrap();
        let rebuilt = Trace::from_collections(t.collections.clone()).unwrap();
        assert_eq!(rebuilt.merges.len(), t.merges.len());
        for (a, b) in rebuilt.merges.iter().zip(&t.merges) {
            assert_eq!(a.result, b.result);
            assert_eq!((a.left_index, a.right_index), (0, 1));
        }
        assert_eq!(rebuilt.discs, t.discs);
    }
}
