//! Closed-form discrepancy bounds and the comparison table.

use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::optimizer::{optimize, OptimizeOptions, OptimizerError};

fn two_to<T: Float>(exp: T) -> T {
    exp.exp2()
}

fn cast<T: Float>(x: u64) -> T {
    T::from(x).expect("integer fits the float type")
}

/// Lower bound `2^(1 - 1/ceil(n/3))` on `disc(n)`.
pub fn lb<T: Float>(n: u32) -> T {
    let k = u64::from(n.max(1)).div_ceil(3);
    two_to(T::one() - T::one() / cast(k))
}

/// Discrepancy `2^(1 - 1/ceil(n/2))` achieved by lex-merge.
pub fn ub_lexmerge<T: Float>(n: u32) -> T {
    let m = u64::from(n.max(1)).div_ceil(2);
    two_to(T::one() - T::one() / cast(m))
}

/// The de Bruijn–Erdős bound `ln(1 + 1/n) / ln(1 / (1 - 1/(2n)))`.
pub fn ub_dbe<T: Float>(n: u32) -> T {
    let n: T = cast(u64::from(n.max(1)));
    let inv = T::one() / n;
    let half_inv = inv / cast(2);
    inv.ln_1p() / -(-half_inv).ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: u32,
    pub lower_bound: f64,
    pub lexmerge_value: f64,
    pub dbe_bound: f64,
    pub optimal: Option<f64>,
}

impl BoundsRow {
    pub fn new(n: u32) -> Self {
        BoundsRow {
            n,
            lower_bound: lb(n),
            lexmerge_value: ub_lexmerge(n),
            dbe_bound: ub_dbe(n),
            optimal: None,
        }
    }

    /// Row invariants `lower_bound <= lexmerge_value <= dbe_bound` that fail.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.lower_bound > self.lexmerge_value {
            out.push("lower_bound > lexmerge_value");
        }
        if self.lexmerge_value > self.dbe_bound {
            out.push("lexmerge_value > dbe_bound");
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct BoundsOptions {
    pub include_optimal: bool,
    /// Optimizer settings used for the `optimal` column; rows with `n` above
    /// the optimizer cap leave it empty.
    pub optimizer: OptimizeOptions,
}

/// Rows for `n_from..=n_to`, computed in parallel and returned in order of `n`.
pub fn bounds_table(
    n_from: u32,
    n_to: u32,
    opts: &BoundsOptions,
) -> Result<Vec<BoundsRow>, OptimizerError> {
    let n_from = n_from.max(1);
    if n_from > n_to {
        return Ok(Vec::new());
    }
    let mut rows: Vec<BoundsRow> = (n_from..=n_to).into_par_iter().map(BoundsRow::new).collect();
    if opts.include_optimal {
        for row in rows.iter_mut().filter(|r| r.n <= opts.optimizer.cap) {
            row.optimal = Some(optimize(row.n, &opts.optimizer)?.disc);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let r2 = std::f64::consts::SQRT_2;
        assert!((lb::<f64>(4) - r2).abs() < 1e-15);
        assert!((ub_lexmerge::<f64>(4) - r2).abs() < 1e-15);
        assert!((ub_lexmerge::<f64>(7) - 1.681_792_830_507_429).abs() < 1e-12);
        // Reference values evaluated with 30-digit arithmetic.
        assert!((ub_dbe::<f64>(3) - 1.577_882_931_182_385_7).abs() < 1e-13);
        assert!((ub_dbe::<f64>(4) - 1.671_094_316_687_521_3).abs() < 1e-13);
        assert!((ub_dbe::<f64>(2) - 1.409_420_839_653_209).abs() < 1e-13);
        assert_eq!(ub_dbe::<f64>(1), 1.0);
        assert!((ub_dbe::<f32>(4) - 1.671_094_3).abs() < 1e-5);
    }

    #[test]
    fn first_rows() {
        let rows = bounds_table(1, 10, &BoundsOptions::default()).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows[0], BoundsRow { n: 1, lower_bound: 1.0, lexmerge_value: 1.0, dbe_bound: 1.0, optimal: None });
        assert!(rows.iter().enumerate().all(|(i, r)| r.n == i as u32 + 1));
    }

    #[test]
    fn rows_are_ordered_up_to_1000() {
        let rows = bounds_table(1, 1000, &BoundsOptions::default()).unwrap();
        assert!(rows.iter().all(|r| r.violations().is_empty()));
    }

    #[test]
    fn lexmerge_asymptotic_form() {
        let c = 4.0 * std::f64::consts::LN_2;
        let worst = (100..=100_000u32)
            .step_by(97)
            .map(|n| {
                let nf = f64::from(n);
                (ub_lexmerge::<f64>(n) - (2.0 - c / nf)).abs() * nf * nf
            })
            .fold(0.0, f64::max);
        assert!(worst < 20.0, "second-order constant {worst}");
    }
}
