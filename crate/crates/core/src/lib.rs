//! Exact lex-merge interval splitting.
//!
//! The crate builds splitting strategies for the unit interval, computes their
//! discrepancy (largest-to-smallest length ratio over all stages) and checks
//! the structural lemmas of the lex-merge construction with exact arithmetic
//! in `Z[2^(1/m)]`. A brute-force LP optimizer computes the optimal
//! discrepancy for small `n`.
//!
//! The core is generic over the length type through [`scalar::Length`]; the
//! aliases below fix the common choices.

pub mod baskets;
pub mod export;
pub mod lexmerge;
pub mod optimizer;
pub mod qnum;
pub mod scalar;
pub mod strategies;
pub mod verify;

pub use num_rational::BigRational as Rational;
pub use qnum::QNumber;
pub use strategies::strategy::{Split, Strategy};

/// Strategy with double-precision lengths.
pub type FloatStrategy = Strategy<f64>;
/// Strategy with single-precision lengths.
pub type Float32Strategy = Strategy<f32>;
/// Strategy with exact lengths in `Z[q]`.
pub type ExactStrategy = Strategy<QNumber>;
/// Strategy with exact rational lengths.
pub type RationalStrategy = Strategy<Rational>;
