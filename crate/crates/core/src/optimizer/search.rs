//! Feasibility oracle, per-schedule bisection and the global search.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::lp::{find_feasible, Constraint, LpScalar};
use super::schedule::{enumerate_schedules, SplitSchedule};
use crate::strategies::bounds::{lb, ub_lexmerge};

pub const DEFAULT_CAP: u32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("n = {n} exceeds the optimizer cap {cap}; raise the cap explicitly to run it")]
    AboveCap { n: u32, cap: u32 },
    #[error("n must be at least 1")]
    ZeroN,
    #[error("tolerance must be in (0, 1], got {0}")]
    BadTolerance(f64),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub cap: u32,
    pub tol: f64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Adds "the split interval is a largest live one" constraints. Off by default.
    pub require_split_largest: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { cap: DEFAULT_CAP, tol: 1e-7, jobs: None, require_split_largest: false }
    }
}

/// Ratio system of one schedule: pairs `(u, v)` of co-alive nodes, as leaf
/// masks, with the constraint `len(u) <= d * len(v)`.
#[derive(Debug, Clone)]
struct System {
    n: usize,
    ratio_pairs: Vec<(u64, u64)>,
    /// Pairs `(v, p)` requiring `len(v) <= len(p)`.
    order_pairs: Vec<(u64, u64)>,
}

impl System {
    fn new(s: &SplitSchedule, require_split_largest: bool) -> Self {
        let tree = s.tree();
        let mut ratio = BTreeSet::new();
        for stage in &tree.stages {
            for &u in stage {
                for &v in stage {
                    if u != v {
                        ratio.insert((tree.leaves[u], tree.leaves[v]));
                    }
                }
            }
        }
        let mut order = BTreeSet::new();
        if require_split_largest {
            for (t, &p) in tree.split_node.iter().enumerate() {
                for &v in tree.stages[t].iter().filter(|&&v| v != p) {
                    order.insert((tree.leaves[v], tree.leaves[p]));
                }
            }
        }
        System {
            n: s.n() as usize,
            ratio_pairs: ratio.into_iter().collect(),
            order_pairs: order.into_iter().collect(),
        }
    }

    /// Constraints on `z = y - 1` for target `d`. Lengths are scale-free, so
    /// requiring every leaf `y_i >= 1` is the same as requiring `y_i > 0`.
    fn constraints<T: LpScalar>(&self, d: &BigRational) -> Vec<Constraint<T>> {
        let d = T::from_rational(d);
        let count = |mask: u64| T::from_rational(&BigRational::from_integer(BigInt::from(mask.count_ones())));
        let row = |u: u64, v: u64, dv: &T| {
            let coeffs = (0..self.n)
                .map(|i| {
                    if u >> i & 1 == 1 {
                        T::one()
                    } else if v >> i & 1 == 1 {
                        T::zero() - dv.clone()
                    } else {
                        T::zero()
                    }
                })
                .collect();
            Constraint { coeffs, rhs: dv.clone() * count(v) - count(u) }
        };
        self.ratio_pairs
            .iter()
            .map(|&(u, v)| row(u, v, &d))
            .chain(self.order_pairs.iter().map(|&(v, p)| row(v, p, &T::one())))
            .collect()
    }

    /// Leaf lengths (unnormalized, each at least 1) if `d` is feasible.
    fn solve<T: LpScalar>(&self, d: &BigRational) -> Option<Vec<T>> {
        if self.n <= 1 {
            return Some(vec![T::one(); self.n]);
        }
        let z = find_feasible(self.n, &self.constraints::<T>(d))?;
        Some(z.into_iter().map(|v| v + T::one()).collect())
    }
}

/// Dyadic grid `d_k = 1 + k / 2^bits` used by every bisection.
#[derive(Debug, Clone, Copy)]
struct Grid {
    bits: u32,
}

impl Grid {
    fn for_tol(tol: f64) -> Self {
        let bits = (1.0 / tol).log2().ceil().max(0.0) as u32;
        Grid { bits }
    }

    fn point(self, k: u64) -> BigRational {
        let den = BigInt::one() << self.bits;
        BigRational::new(&den + BigInt::from(k), den)
    }

    /// Smallest feasible grid index, searching `[0, upper]` when an upper
    /// feasible index is known and by doubling otherwise.
    fn smallest_feasible(self, feasible: impl Fn(&BigRational) -> bool, upper: Option<u64>) -> u64 {
        if feasible(&self.point(0)) {
            return 0;
        }
        let mut lo = 0u64;
        let mut hi = match upper {
            Some(u) => u,
            None => {
                let mut hi = 1u64 << self.bits;
                while !feasible(&self.point(hi)) {
                    lo = hi;
                    hi *= 2;
                }
                hi
            }
        };
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if feasible(&self.point(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// Whether positive leaf lengths exist with every stage ratio at most `d`;
/// returns normalized leaf lengths when they do.
pub fn feasible(s: &SplitSchedule, d: &BigRational) -> Option<Vec<BigRational>> {
    System::new(s, false).solve::<BigRational>(d).map(|y| normalize(&y))
}

fn normalize(y: &[BigRational]) -> Vec<BigRational> {
    let total = y.iter().fold(BigRational::zero(), |acc, v| acc + v);
    y.iter().map(|v| v / &total).collect()
}

/// Certified bracket for one schedule: infeasible at `lower` (when present),
/// feasible at `upper`, with `upper - lower` one grid step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleBracket {
    #[serde(serialize_with = "ser_ratio_opt")]
    pub lower: Option<BigRational>,
    #[serde(serialize_with = "ser_ratio")]
    pub upper: BigRational,
}

impl ScheduleBracket {
    pub fn value(&self) -> f64 {
        self.upper.to_f64().unwrap_or(f64::NAN)
    }
}

fn bracket(grid: Grid, k: u64) -> ScheduleBracket {
    ScheduleBracket { lower: (k > 0).then(|| grid.point(k - 1)), upper: grid.point(k) }
}

/// Smallest feasible `d` for one schedule on a grid of spacing at most `tol`.
pub fn min_disc_for_schedule(s: &SplitSchedule, tol: f64) -> ScheduleBracket {
    let system = System::new(s, false);
    let grid = Grid::for_tol(tol);
    let k = grid.smallest_feasible(|d| system.solve::<BigRational>(d).is_some(), None);
    bracket(grid, k)
}

/// Whether each split in the witness cuts a largest live interval, and
/// whether both pieces are at most the smallest interval of that stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitProperty {
    pub splits_largest: bool,
    pub pieces_at_most_min: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "ser_ratio_vec")]
    pub leaf_lengths: Vec<BigRational>,
    pub achieved_disc: f64,
    #[serde(serialize_with = "ser_ratio")]
    pub achieved_exact: BigRational,
    pub split_property: SplitProperty,
}

impl Witness {
    fn new(s: &SplitSchedule, leaf_lengths: Vec<BigRational>) -> Self {
        let strategy = s.replay(&leaf_lengths);
        let achieved_exact = strategy
            .stage_extremes()
            .into_iter()
            .map(|(max, min)| max / min)
            .max()
            .unwrap_or_else(BigRational::one);
        let mut property = SplitProperty { splits_largest: true, pieces_at_most_min: true };
        for (t, split) in strategy.splits().iter().enumerate() {
            let live = strategy.slots(t + 1);
            let parent = &live[split.slot];
            if live.iter().any(|x| x > parent) {
                property.splits_largest = false;
            }
            if let Some(min) = live.iter().min() {
                if live.len() > 1 && (split.left > *min || split.right > *min) {
                    property.pieces_at_most_min = false;
                }
            }
        }
        Witness {
            achieved_disc: achieved_exact.to_f64().unwrap_or(f64::NAN),
            achieved_exact,
            leaf_lengths,
            split_property: property,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub n: u32,
    /// Discrepancy of the witness strategy.
    pub disc: f64,
    pub bracket: ScheduleBracket,
    pub schedule: SplitSchedule,
    pub witness: Witness,
    pub schedules_examined: usize,
}

fn check(n: u32, opts: &OptimizeOptions) -> Result<(), OptimizerError> {
    if n == 0 {
        return Err(OptimizerError::ZeroN);
    }
    if n > opts.cap {
        return Err(OptimizerError::AboveCap { n, cap: opts.cap });
    }
    if !(opts.tol > 0.0 && opts.tol <= 1.0) {
        return Err(OptimizerError::BadTolerance(opts.tol));
    }
    Ok(())
}

fn with_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, OptimizerError> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| OptimizerError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Rough smallest feasible `d` from a float LP, used only to pick the first
/// candidate; it never decides the answer.
fn estimate(system: &System) -> f64 {
    let feasible = |d: f64| {
        let d = BigRational::from_float(d).expect("finite");
        system.solve::<f64>(&d).is_some()
    };
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    if feasible(lo) {
        return lo;
    }
    while !feasible(hi) && hi < 1e6 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Minimum over all schedules of the smallest feasible grid target, ties
/// broken by the lexicographically smallest `choices`. The answer does not
/// depend on the worker count.
pub fn optimize(n: u32, opts: &OptimizeOptions) -> Result<OptimizeResult, OptimizerError> {
    check(n, opts)?;
    let grid = Grid::for_tol(opts.tol);
    let schedules = enumerate_schedules(n);
    let systems: Vec<System> = schedules.iter().map(|s| System::new(s, opts.require_split_largest)).collect();
    let exact = |i: usize, d: &BigRational| systems[i].solve::<BigRational>(d).is_some();

    let (best, best_k) = with_pool(opts.jobs, || {
        let estimates: Vec<f64> = systems.par_iter().map(estimate).collect();
        let candidate = (0..schedules.len())
            .min_by(|&a, &b| estimates[a].total_cmp(&estimates[b]).then(a.cmp(&b)))
            .expect("at least one schedule");
        let cand_k = grid.smallest_feasible(|d| exact(candidate, d), None);
        // Every schedule that beats or ties the candidate, with its exact index.
        let challengers: Vec<(u64, usize)> = (0..schedules.len())
            .into_par_iter()
            .filter(|&i| i != candidate)
            .filter_map(|i| {
                if cand_k > 0 && exact(i, &grid.point(cand_k - 1)) {
                    let k = grid.smallest_feasible(|d| exact(i, d), Some(cand_k - 1));
                    Some((k, i))
                } else if i < candidate && exact(i, &grid.point(cand_k)) {
                    Some((cand_k, i))
                } else {
                    None
                }
            })
            .collect();
        // Schedules are sorted by choices, so the index breaks ties.
        challengers.into_iter().chain([(cand_k, candidate)]).min().expect("non-empty")
    })
    .map(|(k, i)| (i, k))?;

    let schedule = schedules[best].clone();
    let y = systems[best].solve::<BigRational>(&grid.point(best_k)).expect("feasible at its own bracket");
    let witness = Witness::new(&schedule, normalize(&y));
    Ok(OptimizeResult {
        n,
        disc: witness.achieved_disc,
        bracket: bracket(grid, best_k),
        schedule,
        witness,
        schedules_examined: schedules.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    /// Below the proven lower bound: a bug.
    ViolatesLowerBound,
    /// Above the lex-merge value, which is always achievable: a bug.
    ExceedsLexMerge,
    /// Strictly below the conjectured value: a finding.
    BelowConjecture,
}

impl Verdict {
    pub fn is_bug(self) -> bool {
        matches!(self, Verdict::ViolatesLowerBound | Verdict::ExceedsLexMerge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub n: u32,
    pub tol: f64,
    pub value: f64,
    pub lower_bound: f64,
    pub conjectured: f64,
    pub matches_conjecture: bool,
    pub verdict: Verdict,
    pub result: OptimizeResult,
}

/// Optimizer value against the proven bounds and the conjectured value
/// `2^(1 - 1/ceil(n/2))`.
pub fn conjecture_report(n: u32, opts: &OptimizeOptions) -> Result<ConjectureReport, OptimizerError> {
    let result = optimize(n, opts)?;
    let tol = opts.tol;
    let value = result.disc;
    let lower_bound: f64 = lb(n);
    let conjectured: f64 = ub_lexmerge(n);
    let matches_conjecture = (value - conjectured).abs() <= tol;
    let verdict = if value < lower_bound - tol {
        Verdict::ViolatesLowerBound
    } else if value > conjectured + tol {
        Verdict::ExceedsLexMerge
    } else if value < conjectured - tol {
        Verdict::BelowConjecture
    } else {
        Verdict::Consistent
    };
    Ok(ConjectureReport { n, tol, value, lower_bound, conjectured, matches_conjecture, verdict, result })
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_ratio_opt<S: serde::Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

fn ser_ratio_vec<S: serde::Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

impl Ord for ScheduleBracket {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.cmp(&other.upper)
    }
}

impl PartialOrd for ScheduleBracket {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Eq for ScheduleBracket {}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    #[test]
    fn two_leaves_at_one() {
        let s = SplitSchedule::new(2, vec![0]).unwrap();
        let y = feasible(&s, &rat(1.0)).unwrap();
        assert_eq!(y, vec![rat(0.5), rat(0.5)]);
        assert_eq!(min_disc_for_schedule(&s, 1e-7).value(), 1.0);
        let single = SplitSchedule::new(1, vec![]).unwrap();
        assert_eq!(min_disc_for_schedule(&single, 1e-7).value(), 1.0);
    }

    #[test]
    fn three_leaves_bracket_sqrt2() {
        let s = SplitSchedule::new(3, vec![0, 0]).unwrap();
        assert!(feasible(&s, &rat(1.41)).is_none());
        assert!(feasible(&s, &rat(1.42)).is_some());
        assert!(feasible(&s, &rat(2.0)).is_some());
        let b = min_disc_for_schedule(&s, 1e-7);
        assert!((b.value() - std::f64::consts::SQRT_2).abs() <= 1e-7);
        let lower = b.lower.clone().unwrap().to_f64().unwrap();
        assert!(lower < std::f64::consts::SQRT_2 && std::f64::consts::SQRT_2 <= b.value());
    }

    #[test]
    fn deep_chain_needs_more_than_two() {
        // Always splitting the newest piece leaves the first piece far too long.
        let s = SplitSchedule::new(5, vec![0, 1, 2, 3]).unwrap();
        assert!(feasible(&s, &rat(2.0)).is_none());
        assert!(min_disc_for_schedule(&s, 1e-3).value() > 2.0);
    }

    #[test]
    fn optimize_small() {
        let opts = OptimizeOptions::default();
        let r3 = optimize(3, &opts).unwrap();
        assert!((r3.disc - std::f64::consts::SQRT_2).abs() < 1e-6);
        assert!(r3.witness.achieved_disc <= r3.bracket.value() + 1e-12);
        let sum = r3.witness.leaf_lengths.iter().fold(BigRational::zero(), |a, b| a + b);
        assert!(sum.is_one());
        assert!(matches!(optimize(9, &opts), Err(OptimizerError::AboveCap { n: 9, cap: 8 })));
        assert!(optimize(3, &OptimizeOptions { tol: 0.0, ..opts.clone() }).is_err());
    }

    #[test]
    fn report_for_three() {
        let r = conjecture_report(3, &OptimizeOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.matches_conjecture);
    }
}
