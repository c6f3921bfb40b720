//! Feasibility of `A x <= b, x >= 0` by a dictionary simplex.
//!
//! Phase one adds an auxiliary variable `x0` to every row and maximizes `-x0`
//! using Bland's rule, so the method terminates for any scalar type. Exact
//! answers come from [`BigRational`]; `f64` is used for cheap estimates.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, Zero};

pub trait LpScalar: Clone + Debug + Num + PartialOrd {
    /// Sign, with a tolerance for inexact types.
    fn sign(&self) -> Ordering;
    fn from_rational(r: &BigRational) -> Self;
    fn to_rational(&self) -> BigRational;
}

impl LpScalar for BigRational {
    fn sign(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

const F64_EPS: f64 = 1e-11;

impl LpScalar for f64 {
    fn sign(&self) -> Ordering {
        if *self > F64_EPS {
            Ordering::Greater
        } else if *self < -F64_EPS {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_f64(*self).unwrap_or_else(BigRational::zero)
    }
}

/// One row `sum_j coeffs[j] x_j <= rhs`.
#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub rhs: T,
}

/// Row `basic = constant + sum_j coeffs[j] * nonbasic[j]`.
#[derive(Debug, Clone)]
struct Row<T> {
    basic: usize,
    constant: T,
    coeffs: Vec<T>,
}

struct Dictionary<T> {
    nonbasic: Vec<usize>,
    rows: Vec<Row<T>>,
    objective: Row<T>,
}

impl<T: LpScalar> Dictionary<T> {
    /// Pivots `nonbasic[col]` into the basis through row `r`.
    fn pivot(&mut self, r: usize, col: usize) {
        let leaving = self.rows[r].basic;
        let entering = self.nonbasic[col];
        let a = self.rows[r].coeffs[col].clone();
        // entering = (leaving - constant - sum_{j != col} a_j x_j) / a
        let mut new_row = Row {
            basic: entering,
            constant: T::zero() - self.rows[r].constant.clone() / a.clone(),
            coeffs: self.rows[r]
                .coeffs
                .iter()
                .map(|c| T::zero() - c.clone() / a.clone())
                .collect(),
        };
        new_row.coeffs[col] = T::one() / a;
        let substitute = |row: &mut Row<T>| {
            let factor = row.coeffs[col].clone();
            if factor.is_zero() {
                return;
            }
            row.constant = row.constant.clone() + factor.clone() * new_row.constant.clone();
            for (j, c) in row.coeffs.iter_mut().enumerate() {
                if j == col {
                    *c = factor.clone() * new_row.coeffs[col].clone();
                } else if !new_row.coeffs[j].is_zero() {
                    *c = c.clone() + factor.clone() * new_row.coeffs[j].clone();
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                substitute(row);
            }
        }
        substitute(&mut self.objective);
        self.rows[r] = new_row;
        self.nonbasic[col] = leaving;
    }

    /// Maximizes the objective with Bland's rule. Returns false if unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            let entering = (0..self.nonbasic.len())
                .filter(|&j| self.objective.coeffs[j].sign() == Ordering::Greater)
                .min_by_key(|&j| self.nonbasic[j]);
            let Some(col) = entering else { return true };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row.coeffs[col].sign() != Ordering::Less {
                    continue;
                }
                let bound = row.constant.clone() / (T::zero() - row.coeffs[col].clone());
                let better = match &best {
                    None => true,
                    Some((bi, bb)) => match bound.partial_cmp(bb).expect("comparable") {
                        Ordering::Less => true,
                        Ordering::Equal => row.basic < self.rows[*bi].basic,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((i, bound));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }
}

/// A point of `{x >= 0 : A x <= b}` if the set is non-empty.
pub fn find_feasible<T: LpScalar>(nvars: usize, constraints: &[Constraint<T>]) -> Option<Vec<T>> {
    if constraints.iter().all(|c| c.rhs.sign() != Ordering::Less) {
        return Some(vec![T::zero(); nvars]);
    }
    // Labels: 0..nvars originals, nvars is x0, then one slack per row.
    let aux = nvars;
    let mut dict = Dictionary {
        nonbasic: (0..=nvars).collect(),
        rows: constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut coeffs: Vec<T> = c.coeffs.iter().map(|a| T::zero() - a.clone()).collect();
                coeffs.push(T::one());
                Row { basic: nvars + 1 + i, constant: c.rhs.clone(), coeffs }
            })
            .collect(),
        objective: Row {
            basic: usize::MAX,
            constant: T::zero(),
            coeffs: (0..=nvars).map(|j| if j == aux { T::zero() - T::one() } else { T::zero() }).collect(),
        },
    };
    let most_negative = (0..dict.rows.len())
        .min_by(|&a, &b| {
            dict.rows[a]
                .constant
                .partial_cmp(&dict.rows[b].constant)
                .expect("comparable")
        })
        .expect("at least one row");
    dict.pivot(most_negative, aux);
    dict.optimize();
    if dict.objective.constant.sign() == Ordering::Less {
        return None;
    }
    let mut x = vec![T::zero(); nvars];
    for row in &dict.rows {
        if row.basic < nvars {
            x[row.basic] = row.constant.clone();
        }
    }
    Some(x)
}
