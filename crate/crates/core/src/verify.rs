//! Checkers for the structural claims about lex-merge.
//!
//! Every checker takes data (a collection, a sequence of collections or a
//! strategy) rather than rerunning lex-merge, so externally supplied traces
//! can be audited. A checker that does not apply reports
//! [`Status::Vacuous`], which counts as passing but is shown separately.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::baskets::{
    classify, full_multiplicity, initial_collection, initial_singleton, lex_compare, modulus_for, Basket,
    BasketCollection, Shape,
};
use crate::lexmerge::{disc_exact, merge_step, to_strategy, DiscWitness, Trace};
use crate::qnum::QNumber;
use crate::scalar::{Exponent, Length};
use crate::strategies::strategy::Strategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Conservation,
    DiscTheorem,
    LexLength,
    MergeRule,
    Monotonicity,
    P1,
    P2,
    P3,
    RatioLemma,
    /// Recorded merges and discrepancies of a trace file match the data.
    RecordedData,
    WrappedStructure,
}

impl Check {
    pub const ALL: [Check; 10] = [
        Check::Conservation,
        Check::DiscTheorem,
        Check::LexLength,
        Check::MergeRule,
        Check::Monotonicity,
        Check::P1,
        Check::P2,
        Check::P3,
        Check::RatioLemma,
        Check::WrappedStructure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Conservation => "conservation",
            Check::DiscTheorem => "disc_theorem",
            Check::LexLength => "lex_length",
            Check::MergeRule => "merge_rule",
            Check::Monotonicity => "monotonicity",
            Check::P1 => "p1",
            Check::P2 => "p2",
            Check::P3 => "p3",
            Check::RatioLemma => "ratio_lemma",
            Check::RecordedData => "recorded_data",
            Check::WrappedStructure => "wrapped_structure",
        }
    }

    pub fn from_name(name: &str) -> Option<Check> {
        Check::ALL
            .into_iter()
            .chain([Check::RecordedData])
            .find(|c| c.name() == name.trim())
    }

    /// Checks that look at one collection at a time.
    fn per_stage(self) -> bool {
        matches!(
            self,
            Check::Conservation | Check::LexLength | Check::P1 | Check::P2 | Check::P3 | Check::WrappedStructure
        )
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Vacuous,
    Fail,
}

/// Stages covered by a report (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct StageRange {
    pub first: u32,
    pub last: u32,
}

impl StageRange {
    pub fn single(stage: u32) -> Self {
        StageRange { first: stage, last: stage }
    }
}

impl fmt::Display for StageRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.first == self.last {
            write!(f, "{}", self.first)
        } else {
            write!(f, "{}..={}", self.first, self.last)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: Check,
    pub n: u32,
    pub stages: StageRange,
    pub status: Status,
    /// Violation description; non-empty exactly when the check failed.
    pub witness: String,
    /// Extra information on success, such as the inferred `(r, w)`.
    pub note: String,
}

impl CheckReport {
    pub(crate) fn new(check: Check, n: u32, stages: StageRange, status: Status) -> Self {
        CheckReport { check, n, stages, status, witness: String::new(), note: String::new() }
    }

    fn pass(check: Check, n: u32, stage: u32) -> Self {
        Self::new(check, n, StageRange::single(stage), Status::Pass)
    }

    fn vacuous(check: Check, n: u32, stage: u32, why: &str) -> Self {
        Self::new(check, n, StageRange::single(stage), Status::Vacuous).with_note(why)
    }

    fn fail(check: Check, n: u32, stage: u32, witness: impl Into<String>) -> Self {
        let mut r = Self::new(check, n, StageRange::single(stage), Status::Fail);
        r.witness = witness.into();
        r
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Vacuous => "VACUOUS",
            Status::Fail => "FAIL",
        };
        write!(f, "{status:<7} {:<17} n={:<4} stages {}", self.check.name(), self.n, self.stages)?;
        if !self.witness.is_empty() {
            write!(f, "  witness: {}", self.witness)?;
        } else if !self.note.is_empty() {
            write!(f, "  ({})", self.note)?;
        }
        Ok(())
    }
}

fn stage_of(c: &BasketCollection) -> u32 {
    c.stage
}

fn is_power_of_two(x: usize) -> bool {
    x.is_power_of_two()
}

/// Every basket is a singleton or some `I_h(a)`.
pub fn check_p1(c: &BasketCollection) -> CheckReport {
    let stage = stage_of(c);
    for b in &c.baskets {
        if !classify(c.n, b).is_cyclically_ordered() {
            return CheckReport::fail(Check::P1, c.n, stage, format!("{b} is not cyclically ordered"));
        }
    }
    CheckReport::pass(Check::P1, c.n, stage)
}

/// Size structure `(r, w)`: sizes lie in `{2^r, 2^(r+1)}` apart from at most
/// one exceptional basket of size `w` strictly between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeStructure {
    pub r: u32,
    /// Index and size of the exceptional basket.
    pub exceptional: Option<(usize, usize)>,
}

/// Infers the size structure, or describes why none exists.
pub fn size_structure(c: &BasketCollection) -> Result<SizeStructure, String> {
    let odd: Vec<(usize, &Basket)> = c.baskets.iter().enumerate().filter(|(_, b)| !is_power_of_two(b.len())).collect();
    if odd.len() > 1 {
        return Err(format!(
            "two baskets with sizes that are not powers of two: {} and {}",
            odd[0].1, odd[1].1
        ));
    }
    let exceptional = odd.first().map(|&(i, b)| (i, b.len()));
    let min_power = c.baskets.iter().map(Basket::len).filter(|&s| is_power_of_two(s)).min();
    let r = match (exceptional, min_power) {
        (Some((_, w)), _) => w.ilog2(),
        (None, Some(p)) => p.ilog2(),
        (None, None) => return Err("empty collection".to_string()),
    };
    if let Some(b) = c.baskets.iter().find(|b| is_power_of_two(b.len()) && b.len() != 1 << r && b.len() != 2 << r) {
        return Err(format!("size of {b} is outside {{{}, {}}}", 1usize << r, 2usize << r));
    }
    Ok(SizeStructure { r, exceptional })
}

pub fn check_p2(c: &BasketCollection) -> CheckReport {
    let stage = stage_of(c);
    match size_structure(c) {
        Err(why) => CheckReport::fail(Check::P2, c.n, stage, why),
        Ok(s) => match s.exceptional {
            Some((i, w)) if !c.baskets[i].is_wrapped() => CheckReport::fail(
                Check::P2,
                c.n,
                stage,
                format!("exceptional basket {} of size {w} is not wrapped", c.baskets[i]),
            ),
            Some((_, w)) => CheckReport::pass(Check::P2, c.n, stage).with_note(format!("r={}, w={w}", s.r)),
            None => CheckReport::pass(Check::P2, c.n, stage).with_note(format!("r={}", s.r)),
        },
    }
}

/// Positions `0..n` stand for the singletons of `B_0` in order: position `j`
/// holds value `j / 2`. A basket covers a contiguous run of positions, except
/// that a lone copy of a doubled value may sit at either of its two positions.
#[derive(Debug, Clone)]
struct Placement {
    fixed: Vec<u32>,
    /// Values whose single copy could take position `2x` or `2x + 1`.
    loose: Vec<u32>,
}

fn placement(n: u32, group: &[&Basket]) -> Result<Placement, String> {
    let m = modulus_for(n);
    let mut fixed = Vec::new();
    let mut loose_counts = vec![0usize; m as usize];
    for b in group {
        let full = b.elements().iter().all(|&x| full_multiplicity(n, x) == 1);
        if b.len() == 1 && !full {
            loose_counts[b.elements()[0] as usize] += 1;
            continue;
        }
        match classify(n, b).shape {
            Shape::CyclicallyOrdered { a, h } => {
                for j in 0..h {
                    let x = (a + j) % m;
                    fixed.push(2 * x);
                    if full_multiplicity(n, x) == 2 {
                        fixed.push(2 * x + 1);
                    }
                }
            }
            _ => return Err(format!("{b} is not a cyclic interval")),
        }
    }
    let mut loose = Vec::new();
    for (x, &count) in loose_counts.iter().enumerate() {
        let x = x as u32;
        match count {
            0 => {}
            1 => loose.push(x),
            _ => {
                fixed.push(2 * x);
                fixed.push(2 * x + 1);
                if count > 2 {
                    return Err(format!("value {x} appears {count} times as a singleton"));
                }
            }
        }
    }
    Ok(Placement { fixed, loose })
}

/// The arc `(start, len)` covered by `positions`, if they are distinct and
/// contiguous on the cycle `0..n`. The empty set gives `None`.
fn arc_of(n: u32, positions: &[u32]) -> Option<Option<(u32, u32)>> {
    if positions.is_empty() {
        return Some(None);
    }
    let mut seen = vec![false; n as usize];
    for &p in positions {
        if p >= n || std::mem::replace(&mut seen[p as usize], true) {
            return None;
        }
    }
    let len = positions.len() as u32;
    if len == n {
        return Some(Some((0, n)));
    }
    let mut starts = (0..n).filter(|&p| seen[p as usize] && !seen[((p + n - 1) % n) as usize]);
    let start = starts.next()?;
    starts.next().is_none().then_some(Some((start, len)))
}

/// All arcs reachable by placing the loose singletons (at most two of them
/// can sit at the ends of a contiguous run).
fn candidate_arcs(n: u32, p: &Placement) -> Vec<Option<(u32, u32)>> {
    if p.loose.len() > 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for mask in 0..(1u32 << p.loose.len()) {
        let mut positions = p.fixed.clone();
        for (i, &x) in p.loose.iter().enumerate() {
            positions.push(2 * x + (mask >> i & 1));
        }
        if let Some(arc) = arc_of(n, &positions) {
            out.push(arc);
        }
    }
    out
}

/// Size-`2^r` baskets form a chain, size-`2^(r+1)` baskets form a chain, and
/// the second chain continues where the first one ends.
pub fn check_p3(c: &BasketCollection) -> CheckReport {
    let stage = stage_of(c);
    let fail = |why: String| CheckReport::fail(Check::P3, c.n, stage, why);
    let s = match size_structure(c) {
        Ok(s) => s,
        Err(why) => return fail(format!("no size structure: {why}")),
    };
    let small: Vec<&Basket> = c.baskets.iter().filter(|b| b.len() == 1 << s.r).collect();
    let large: Vec<&Basket> = c.baskets.iter().filter(|b| b.len() == 2 << s.r).collect();
    if small.is_empty() && large.is_empty() {
        return CheckReport::vacuous(Check::P3, c.n, stage, "no baskets of size 2^r or 2^(r+1)");
    }
    let arcs = |group: &[&Basket], label: &str| -> Result<Vec<Option<(u32, u32)>>, String> {
        let p = placement(c.n, group).map_err(|e| format!("{label} chain: {e}"))?;
        let arcs = candidate_arcs(c.n, &p);
        if arcs.is_empty() {
            let listed: Vec<String> = group.iter().map(|b| b.to_string()).collect();
            return Err(format!("size-{label} baskets {} do not form a chain", listed.join(",")));
        }
        Ok(arcs)
    };
    let small_label = format!("{}", 1usize << s.r);
    let large_label = format!("{}", 2usize << s.r);
    let (small_arcs, large_arcs) = match (arcs(&small, &small_label), arcs(&large, &large_label)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(e),
    };
    let joins = |l: Option<(u32, u32)>, sm: Option<(u32, u32)>| match (l, sm) {
        (Some((ls, ll)), Some((ss, sl))) => ll + sl <= c.n && (ls + ll) % c.n == ss,
        _ => true,
    };
    let ok = large_arcs.iter().any(|&l| small_arcs.iter().any(|&sm| joins(l, sm)));
    if ok {
        CheckReport::pass(Check::P3, c.n, stage)
    } else {
        fail(format!(
            "size-{large_label} chain does not continue into the size-{small_label} chain"
        ))
    }
}

/// The exceptional wrapped basket `W` of size `w` satisfies `w = 2^r + s`
/// with `n = a 2^r + s`, and `W` is the union of the last `2^r - s` and the
/// first `2s` singletons of `B_0`.
pub fn check_wrapped_structure(c: &BasketCollection) -> CheckReport {
    let stage = stage_of(c);
    let n = c.n;
    let fail = |why: String| CheckReport::fail(Check::WrappedStructure, n, stage, why);
    let (r, (index, w)) = match size_structure(c) {
        Ok(SizeStructure { r, exceptional: Some(e) }) if c.baskets[e.0].is_wrapped() => (r, e),
        _ => return CheckReport::vacuous(Check::WrappedStructure, n, stage, "no exceptional wrapped basket"),
    };
    let basket = &c.baskets[index];
    let p = 1u32 << r;
    let s = n % p;
    if s == 0 {
        return fail(format!("{basket}: 2^r = {p} divides n, so no exceptional size is possible"));
    }
    if w as u32 != p + s {
        return fail(format!("{basket}: size {w} differs from 2^r + s = {}", p + s));
    }
    let mut expected: Vec<u32> = (n - (p - s) + 1..=n)
        .chain(1..=2 * s)
        .map(|j| initial_singleton(n, j))
        .collect();
    expected.sort_unstable();
    if basket.elements() != expected.as_slice() {
        return fail(format!(
            "{basket} differs from the union of the last {} and first {} singletons {:?}",
            p - s,
            2 * s,
            expected
        ));
    }
    CheckReport::pass(Check::WrappedStructure, n, stage).with_note(format!("w={w}=2^{r}+{s}"))
}

/// Adjacent baskets in the lexicographic order have non-decreasing lengths.
pub fn check_lex_length(c: &BasketCollection) -> CheckReport {
    let stage = stage_of(c);
    if c.baskets.len() < 2 {
        return CheckReport::vacuous(Check::LexLength, c.n, stage, "fewer than two baskets");
    }
    let mut sorted: Vec<&Basket> = c.baskets.iter().collect();
    sorted.sort_by(|a, b| lex_compare(a, b));
    let lengths: Vec<QNumber> = sorted.iter().map(|b| b.length()).collect();
    for (pair, len) in sorted.windows(2).zip(lengths.windows(2)) {
        if len[0].compare(&len[1]) == Ok(Ordering::Greater) {
            return CheckReport::fail(
                Check::LexLength,
                c.n,
                stage,
                format!("{} precedes {} but is longer ({} > {})", pair[0], pair[1], len[0], len[1]),
            );
        }
    }
    CheckReport::pass(Check::LexLength, c.n, stage)
}

/// Every value appears with its full multiplicity and stage `i` holds
/// `n - i` baskets.
pub fn check_conservation(c: &BasketCollection) -> CheckReport {
    let stage = stage_of(c);
    let fail = |why: String| CheckReport::fail(Check::Conservation, c.n, stage, why);
    if c.m != modulus_for(c.n) {
        return fail(format!("m = {} but n = {} needs m = {}", c.m, c.n, modulus_for(c.n)));
    }
    if let Some(b) = c.baskets.iter().find(|b| b.modulus() != c.m) {
        return fail(format!("{b} has modulus {} instead of {}", b.modulus(), c.m));
    }
    let expected_len = c.n.checked_sub(stage).map(|x| x as usize);
    if expected_len != Some(c.baskets.len()) {
        return fail(format!("stage {stage} has {} baskets, expected n - stage", c.baskets.len()));
    }
    let counts = c.element_counts();
    for (x, &count) in counts.iter().enumerate() {
        let full = full_multiplicity(c.n, x as u32);
        if count != full {
            return fail(format!("value {x} appears {count} times, expected {full}"));
        }
    }
    CheckReport::pass(Check::Conservation, c.n, stage)
}

pub(crate) fn range(collections: &[BasketCollection]) -> StageRange {
    StageRange {
        first: collections.first().map_or(0, stage_of),
        last: collections.last().map_or(0, stage_of),
    }
}

fn trace_n(collections: &[BasketCollection]) -> u32 {
    collections.first().map_or(0, |c| c.n)
}

fn witnesses(collections: &[BasketCollection]) -> Result<Vec<DiscWitness>, String> {
    collections
        .iter()
        .map(|c| disc_exact(c).map_err(|e| format!("stage {}: {e}", c.stage)))
        .collect()
}

/// `disc(B_(i+1)) <= disc(B_i)`, by exact cross-multiplication.
pub fn check_monotonicity(collections: &[BasketCollection]) -> CheckReport {
    let n = trace_n(collections);
    let stages = range(collections);
    let mut report = CheckReport::new(Check::Monotonicity, n, stages, Status::Pass);
    if collections.len() < 2 {
        report.status = Status::Vacuous;
        return report.with_note("fewer than two stages");
    }
    let ws = match witnesses(collections) {
        Ok(ws) => ws,
        Err(e) => {
            report.status = Status::Fail;
            report.witness = e;
            return report;
        }
    };
    for (i, pair) in ws.windows(2).enumerate() {
        let lhs = &pair[1].max_length * &pair[0].min_length;
        let rhs = &pair[0].max_length * &pair[1].min_length;
        if lhs.compare(&rhs) == Ok(Ordering::Greater) {
            report.status = Status::Fail;
            report.witness = format!(
                "disc rises from stage {} to {}: {:.12} -> {:.12}",
                collections[i].stage,
                collections[i + 1].stage,
                pair[0].ratio_f64(),
                pair[1].ratio_f64()
            );
            return report;
        }
    }
    report
}

/// `B_0` is the initial collection and each stage merges the two smallest
/// baskets of the previous one.
pub fn check_merge_rule(collections: &[BasketCollection]) -> CheckReport {
    let n = trace_n(collections);
    let mut report = CheckReport::new(Check::MergeRule, n, range(collections), Status::Pass);
    let mut fail = |why: String| {
        report.status = Status::Fail;
        report.witness = why;
        report.clone()
    };
    match (collections.first(), initial_collection(n.max(1))) {
        (Some(first), Ok(init)) if first.stage == 0 && same_baskets(first, &init) => {}
        (Some(first), _) => return fail(format!("stage {} is not the initial collection", first.stage)),
        (None, _) => return fail("empty trace".to_string()),
    }
    if collections.len() != n as usize {
        return fail(format!("{} stages recorded, expected {n}", collections.len()));
    }
    for pair in collections.windows(2) {
        let expected = match merge_step(&pair[0]) {
            Ok((next, _)) => next,
            Err(e) => return fail(format!("stage {}: {e}", pair[0].stage)),
        };
        if pair[1].stage != pair[0].stage + 1 || !same_baskets(&pair[1], &expected) {
            return fail(format!(
                "stage {} is {} but merging the two smallest baskets of stage {} gives {}",
                pair[1].stage, pair[1], pair[0].stage, expected
            ));
        }
    }
    report
}

fn same_baskets(a: &BasketCollection, b: &BasketCollection) -> bool {
    let mut x: Vec<&Basket> = a.baskets.iter().collect();
    let mut y: Vec<&Basket> = b.baskets.iter().collect();
    x.sort();
    y.sort();
    x == y
}

/// The largest stage discrepancy equals `q^(m-1) = 2^(1 - 1/m)` exactly.
pub fn check_disc_theorem(collections: &[BasketCollection]) -> CheckReport {
    let n = trace_n(collections);
    let mut report = CheckReport::new(Check::DiscTheorem, n, range(collections), Status::Pass);
    let ws = match witnesses(collections) {
        Ok(ws) if !ws.is_empty() => ws,
        Ok(_) => {
            report.status = Status::Fail;
            report.witness = "empty trace".into();
            return report;
        }
        Err(e) => {
            report.status = Status::Fail;
            report.witness = e;
            return report;
        }
    };
    let m = modulus_for(n);
    let (stage, best) = ws
        .iter()
        .enumerate()
        .reduce(|a, b| if b.1.cmp_ratio(a.1) == Ordering::Greater { b } else { a })
        .expect("non-empty");
    let target = QNumber::q_power(m, u64::from(m - 1));
    match best.ratio_vs(&target) {
        Ordering::Equal => report.with_note(format!("max at stage {stage}, equal to q^{}", m - 1)),
        other => {
            report.status = Status::Fail;
            report.witness = format!(
                "max disc {:.15} at stage {stage} is {:?} than q^{} = {:.15}",
                best.ratio_f64(),
                other,
                m - 1,
                target.to_f64()
            );
            report
        }
    }
}

/// For every `k < n` and `i < k` with `k + 2i - 1 <= n`, the lengths of
/// `I_k` sorted as `x_1 >= ... >= x_k` satisfy `x_i >= 2^eps x_(i+1)`.
/// Also verifies the precondition `disc(S) <= 2^(1 - eps)`.
pub fn check_ratio_lemma<T: Length>(s: &Strategy<T>, eps: Exponent) -> CheckReport {
    let n = s.len() as u32;
    let mut report = CheckReport::new(Check::RatioLemma, n, StageRange { first: 1, last: n }, Status::Pass);
    if eps.num > eps.den || eps.num == 0 {
        report.status = Status::Fail;
        report.witness = format!("epsilon {eps} must lie in (0, 1]");
        return report;
    }
    let precondition = (s.disc_cmp(eps.complement()) == Ordering::Greater)
        .then(|| format!("precondition fails: disc {:.15} exceeds 2^(1-{eps})", s.disc_of()));
    let mut any = false;
    // Lengths of the current stage, sorted decreasingly, plus the slot view.
    let mut x: Vec<T> = vec![s.total().clone()];
    let mut slots: Vec<T> = vec![s.total().clone()];
    let desc = |a: &T, b: &T| b.cmp_len(a);
    for (step, split) in s.splits().iter().enumerate() {
        let k = step as u32 + 2;
        let parent = std::mem::replace(&mut slots[split.slot], split.left.clone());
        slots.push(split.right.clone());
        let at = x.binary_search_by(|v| desc(v, &parent)).expect("parent is live");
        x.remove(at);
        for piece in [&split.left, &split.right] {
            let at = x.partition_point(|v| desc(v, piece) != Ordering::Greater);
            x.insert(at, piece.clone());
        }
        if k >= n {
            break;
        }
        let max_i = (n + 1 - k) / 2;
        for i in 1..k.min(max_i + 1) {
            any = true;
            let (a, b) = (&x[i as usize - 1], &x[i as usize]);
            if a.cmp_scaled(b, eps) == Ordering::Less {
                report.status = Status::Fail;
                report.stages = StageRange::single(k);
                report.witness = format!("k={k}, i={i}: x_i/x_(i+1) = {:.15} < 2^{eps}", a.ratio_f64(b));
                if let Some(p) = precondition {
                    report.witness += &format!(" ({p})");
                }
                return report;
            }
        }
    }
    if let Some(p) = precondition {
        report.status = Status::Fail;
        report.witness = p;
        return report;
    }
    if !any {
        report.status = Status::Vacuous;
        report.note = "no (k, i) with k + 2i - 1 <= n".into();
    }
    report
}

/// Folds per-stage reports for one check into a single report: the first
/// failure wins, and the range is vacuous only if every stage was.
fn aggregate(check: Check, n: u32, stages: StageRange, reports: Vec<CheckReport>) -> CheckReport {
    if let Some(failure) = reports.iter().find(|r| r.status == Status::Fail) {
        let mut r = failure.clone();
        r.witness = format!("stage {}: {}", failure.stages, failure.witness);
        r.stages = stages;
        return r;
    }
    let status = if !reports.is_empty() && reports.iter().all(|r| r.status == Status::Vacuous) {
        Status::Vacuous
    } else {
        Status::Pass
    };
    let vacuous = reports.iter().filter(|r| r.status == Status::Vacuous).count();
    let mut r = CheckReport::new(check, n, stages, status);
    if vacuous > 0 && status == Status::Pass {
        r.note = format!("{vacuous} of {} stages vacuous", reports.len());
    }
    r
}

pub fn check_stage(check: Check, c: &BasketCollection) -> Option<CheckReport> {
    Some(match check {
        Check::Conservation => check_conservation(c),
        Check::LexLength => check_lex_length(c),
        Check::P1 => check_p1(c),
        Check::P2 => check_p2(c),
        Check::P3 => check_p3(c),
        Check::WrappedStructure => check_wrapped_structure(c),
        _ => return None,
    })
}

/// Runs the selected checks over a sequence of collections `B_0, B_1, ...`,
/// one report per check, ordered by check name.
pub fn verify_collections(collections: &[BasketCollection], checks: &[Check]) -> Vec<CheckReport> {
    let n = trace_n(collections);
    let stages = range(collections);
    let mut selected: Vec<Check> = checks.to_vec();
    selected.sort();
    selected.dedup();
    selected
        .into_iter()
        .map(|check| {
            if check.per_stage() {
                let per: Vec<CheckReport> = collections.iter().filter_map(|c| check_stage(check, c)).collect();
                return aggregate(check, n, stages, per);
            }
            match check {
                Check::Monotonicity => check_monotonicity(collections),
                Check::MergeRule => check_merge_rule(collections),
                Check::DiscTheorem => check_disc_theorem(collections),
                Check::RatioLemma => ratio_lemma_for_trace(collections),
                Check::RecordedData => CheckReport::new(check, n, stages, Status::Vacuous)
                    .with_note("no recorded data to compare"),
                _ => unreachable!("per-stage checks handled above"),
            }
        })
        .collect()
}

fn ratio_lemma_for_trace(collections: &[BasketCollection]) -> CheckReport {
    let n = trace_n(collections);
    let strategy = Trace::from_collections(collections.to_vec()).and_then(|t| to_strategy(&t));
    match strategy {
        Ok(s) => check_ratio_lemma(&s, Exponent::new(1, u64::from(modulus_for(n)))),
        Err(e) => {
            let mut r = CheckReport::new(Check::RatioLemma, n, range(collections), Status::Fail);
            r.witness = format!("trace does not define a strategy: {e}");
            r
        }
    }
}

/// Every check over `run(n)`.
pub fn verify_all(n: u32) -> Vec<CheckReport> {
    verify_n(n, &Check::ALL)
}

/// Selected checks over `run(n)`.
pub fn verify_n(n: u32, checks: &[Check]) -> Vec<CheckReport> {
    match crate::lexmerge::run(n) {
        Ok(trace) => verify_collections(&trace.collections, checks),
        Err(e) => {
            let mut r = CheckReport::new(Check::MergeRule, n, StageRange::single(0), Status::Fail);
            r.witness = format!("lex-merge failed: {e}");
            vec![r]
        }
    }
}

/// Deliberately broken inputs, one per checker.
pub mod fixtures {
    use super::*;
    use crate::baskets::cyclic_interval;
    use crate::strategies::strategy::Split;

    fn collection(n: u32, stage: u32, baskets: Vec<Vec<u32>>) -> BasketCollection {
        let m = modulus_for(n);
        BasketCollection {
            n,
            m,
            stage,
            baskets: baskets.into_iter().map(|e| Basket::new(m, e).expect("valid basket")).collect(),
        }
    }

    /// `{[0,0,2,2]}` for `n = 8`: a gap at 1.
    pub fn p1_gap() -> BasketCollection {
        collection(8, 7, vec![vec![0, 0, 2, 2]])
    }

    /// A size-3 basket that is not wrapped next to powers of two.
    pub fn p2_unwrapped_exception() -> BasketCollection {
        collection(8, 4, vec![vec![0], vec![0, 0], vec![1, 1], vec![1, 1, 2]])
    }

    /// `{I_2(0), I_2(3)}` for `n = 12`: values 2 and 5 are missing, so no
    /// ordering of the two intervals is a chain, even cyclically.
    pub fn p3_hole() -> BasketCollection {
        let b = |a| cyclic_interval(12, a, 2).expect("valid interval");
        BasketCollection { n: 12, m: 6, stage: 10, baskets: vec![b(0), b(3)] }
    }

    /// `B_4` of `n = 7` with the wrapped basket replaced by `[0,1,3]`.
    pub fn wrapped_wrong_members() -> BasketCollection {
        collection(7, 4, vec![vec![0, 2], vec![1, 2], vec![0, 1, 3]])
    }

    /// `[0,2]` precedes `[1,1]` but `1 + q^2 - 2q = (q - 1)^2 > 0` makes it longer.
    pub fn lex_length_inversion() -> BasketCollection {
        collection(6, 4, vec![vec![0, 2], vec![1, 1]])
    }

    /// Collection with a value missing.
    pub fn conservation_missing() -> BasketCollection {
        collection(4, 2, vec![vec![0, 0], vec![1]])
    }

    /// Two stages whose discrepancy rises.
    pub fn monotonicity_rise() -> Vec<BasketCollection> {
        vec![
            collection(4, 0, vec![vec![0], vec![0], vec![1], vec![1]]),
            collection(4, 1, vec![vec![0], vec![0], vec![1, 1]]),
        ]
    }

    /// `run(5)` with the first merge taking the wrong pair.
    pub fn merge_rule_wrong_pair() -> Vec<BasketCollection> {
        let mut t = crate::lexmerge::run(5).expect("run").collections;
        t[1] = collection(5, 1, vec![vec![0], vec![1], vec![2], vec![0, 1]]);
        t
    }

    /// Greedy halving trace data for `n = 4`, whose largest discrepancy is 2.
    pub fn disc_theorem_too_large() -> Vec<BasketCollection> {
        vec![
            collection(4, 0, vec![vec![0], vec![0], vec![1], vec![1]]),
            collection(4, 1, vec![vec![0], vec![1], vec![0, 1]]),
            collection(4, 2, vec![vec![0, 1], vec![0, 1]]),
            collection(4, 3, vec![vec![0, 0, 1, 1]]),
        ]
    }

    /// Strategy of length 6 whose stage 3 is `{0.4, 0.32, 0.28}`, so
    /// `x_1/x_2 = 1.25 < 2^(1/3)` at `k = 3, i = 1`.
    pub fn ratio_violation() -> Strategy<f64> {
        Strategy::new(
            1.0,
            vec![
                Split { slot: 0, left: 0.4, right: 0.6 },
                Split { slot: 1, left: 0.32, right: 0.28 },
                Split { slot: 0, left: 0.2, right: 0.2 },
                Split { slot: 1, left: 0.16, right: 0.16 },
                Split { slot: 2, left: 0.14, right: 0.14 },
            ],
        )
        .expect("valid strategy")
    }
}
