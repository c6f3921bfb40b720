//! File formats: the JSON trace schema and CSV number formatting.
//!
//! Trace files carry exact data only. Baskets are integer arrays and lengths
//! are coefficient vectors in `Z[q]`; no decimal value is ever stored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baskets::{modulus_for, Basket, BasketCollection, BasketError};
use crate::lexmerge::{disc_exact, Trace};
use crate::qnum::QNumber;
use crate::strategies::bounds::BoundsRow;
use crate::verify::{range, verify_collections, Check, CheckReport, Status};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("n must be at least 1")]
    ZeroN,
    #[error("m = {m} does not match n = {n} (expected {expected})")]
    Modulus { n: u32, m: u32, expected: u32 },
    #[error("stage {stage}, basket {index}: {source}")]
    Basket { stage: usize, index: usize, source: BasketError },
    #[error("trace has no collections")]
    Empty,
    #[error("coefficient does not fit in 64 bits")]
    Coefficient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEntry {
    /// Index of the collection the merge applies to.
    pub step: u32,
    pub left_index: usize,
    pub right_index: usize,
}

/// Exact `ell(max)` and `ell(min)` of one collection, as coefficient vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscCoeffs {
    pub max: Vec<i64>,
    pub min: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    pub n: u32,
    pub m: u32,
    pub collections: Vec<Vec<Vec<u32>>>,
    pub merges: Vec<MergeEntry>,
    pub disc_coeffs: Vec<DiscCoeffs>,
}

fn coeffs(q: &QNumber) -> Result<Vec<i64>, ExportError> {
    q.to_i64_coeffs().ok_or(ExportError::Coefficient)
}

impl TraceFile {
    pub fn from_trace(t: &Trace) -> Result<Self, ExportError> {
        Ok(TraceFile {
            n: t.n,
            m: t.m,
            collections: t
                .collections
                .iter()
                .map(|c| c.baskets.iter().map(|b| b.elements().to_vec()).collect())
                .collect(),
            merges: t
                .merges
                .iter()
                .map(|r| MergeEntry { step: r.stage, left_index: r.left_index, right_index: r.right_index })
                .collect(),
            disc_coeffs: t
                .discs
                .iter()
                .map(|d| Ok(DiscCoeffs { max: coeffs(&d.max_length)?, min: coeffs(&d.min_length)? }))
                .collect::<Result<_, ExportError>>()?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace files serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ExportError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Collections `B_0, B_1, ...` with every basket validated. Structural
    /// problems (bad modulus, out-of-range values, multiplicity above two) are
    /// errors; anything else is left for the checkers.
    pub fn collections(&self) -> Result<Vec<BasketCollection>, ExportError> {
        if self.n == 0 {
            return Err(ExportError::ZeroN);
        }
        let expected = modulus_for(self.n);
        if self.m != expected {
            return Err(ExportError::Modulus { n: self.n, m: self.m, expected });
        }
        if self.collections.is_empty() {
            return Err(ExportError::Empty);
        }
        self.collections
            .iter()
            .enumerate()
            .map(|(stage, baskets)| {
                let baskets = baskets
                    .iter()
                    .enumerate()
                    .map(|(index, e)| {
                        Basket::new(self.m, e.clone()).map_err(|source| ExportError::Basket { stage, index, source })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(BasketCollection { n: self.n, m: self.m, stage: stage as u32, baskets })
            })
            .collect()
    }

    /// Compares the recorded merges and discrepancy coefficients with the
    /// collections they accompany.
    pub fn check_recorded(&self, collections: &[BasketCollection]) -> CheckReport {
        let mut report = CheckReport::new(Check::RecordedData, self.n, range(collections), Status::Pass);
        if let Err(why) = self.recorded_mismatch(collections) {
            report.status = Status::Fail;
            report.witness = why;
        }
        report
    }

    fn recorded_mismatch(&self, collections: &[BasketCollection]) -> Result<(), String> {
        if self.merges.len() + 1 != collections.len() {
            return Err(format!("{} merges for {} collections", self.merges.len(), collections.len()));
        }
        for (i, entry) in self.merges.iter().enumerate() {
            let before = &collections[i];
            let after = &collections[i + 1];
            if entry.step as usize != i || entry.left_index == entry.right_index {
                return Err(format!("merge {i}: bad step or indices {entry:?}"));
            }
            let (l, r) = match (before.baskets.get(entry.left_index), before.baskets.get(entry.right_index)) {
                (Some(l), Some(r)) => (l, r),
                _ => return Err(format!("merge {i}: index out of range {entry:?}")),
            };
            let union = l.union(r).map_err(|e| format!("merge {i}: {e}"))?;
            let mut expected: Vec<&Basket> = before
                .baskets
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != entry.left_index && *j != entry.right_index)
                .map(|(_, b)| b)
                .chain([&union])
                .collect();
            let mut actual: Vec<&Basket> = after.baskets.iter().collect();
            expected.sort();
            actual.sort();
            if expected != actual {
                return Err(format!("merge {i}: recorded merge of {l} and {r} does not produce stage {}", i + 1));
            }
        }
        if self.disc_coeffs.len() != collections.len() {
            return Err(format!("{} disc entries for {} collections", self.disc_coeffs.len(), collections.len()));
        }
        for (c, recorded) in collections.iter().zip(&self.disc_coeffs) {
            let w = disc_exact(c).map_err(|e| e.to_string())?;
            let actual = DiscCoeffs {
                max: coeffs(&w.max_length).map_err(|e| e.to_string())?,
                min: coeffs(&w.min_length).map_err(|e| e.to_string())?,
            };
            if actual != *recorded {
                return Err(format!(
                    "stage {}: recorded disc coefficients {recorded:?} differ from {actual:?}",
                    c.stage
                ));
            }
        }
        Ok(())
    }

    /// Selected checks on the file's collections plus the recorded-data check.
    pub fn audit(&self, checks: &[Check]) -> Result<Vec<CheckReport>, ExportError> {
        let collections = self.collections()?;
        let mut reports = verify_collections(&collections, checks);
        reports.retain(|r| r.check != Check::RecordedData);
        reports.push(self.check_recorded(&collections));
        reports.sort_by_key(|r| (r.check, r.stages));
        Ok(reports)
    }
}

/// Formats `x` with `digits` significant digits in fixed notation, keeping
/// trailing zeros.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = |mag: i64| (digits as i64 - 1 - mag).max(0) as usize;
    let text = format!("{:.*}", decimals(magnitude), x);
    // Rounding can carry into a new leading digit (9.99.. -> 10.0..).
    let significant = text.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if significant > digits && decimals(magnitude) > 0 {
        return format!("{:.*}", decimals(magnitude + 1), x);
    }
    text
}

pub const CSV_DIGITS: usize = 12;

pub fn bounds_csv_header(with_optimal: bool) -> &'static str {
    if with_optimal {
        "n,lower_bound,lexmerge,dbe_bound,optimal"
    } else {
        "n,lower_bound,lexmerge,dbe_bound"
    }
}

/// The bounds table as CSV; an empty `optimal` cell means it was not computed.
pub fn bounds_csv(rows: &[BoundsRow], with_optimal: bool) -> String {
    let mut out = String::from(bounds_csv_header(with_optimal));
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}",
            r.n,
            format_sig(r.lower_bound, CSV_DIGITS),
            format_sig(r.lexmerge_value, CSV_DIGITS),
            format_sig(r.dbe_bound, CSV_DIGITS)
        ));
        if with_optimal {
            out.push(',');
            if let Some(v) = r.optimal {
                out.push_str(&format_sig(v, CSV_DIGITS));
            }
        }
        out.push('\n');
    }
    out
}
