//! Splitting strategies, the reference constructions and the bounds table.

pub mod bounds;
pub mod dbe;
pub mod greedy;
pub mod strategy;

pub use bounds::{bounds_table, lb, ub_dbe, ub_lexmerge, BoundsOptions, BoundsRow};
pub use dbe::{dbe_points, strategy_from_points, CirclePointSet, DbeError};
pub use greedy::greedy_half;
pub use strategy::{Split, Strategy, StrategyError};
