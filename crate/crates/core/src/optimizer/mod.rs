//! Exhaustive minimax search for the optimal discrepancy of small `n`.
//!
//! Every split schedule gets a linear feasibility system in the leaf lengths;
//! the smallest feasible target on a dyadic grid is found by bisection, and
//! the minimum over schedules is reduced deterministically.

pub mod lp;
pub mod schedule;
pub mod search;

pub use schedule::{enumerate_schedules, raw_schedules, ScheduleError, SplitSchedule};
pub use search::{
    conjecture_report, feasible, min_disc_for_schedule, optimize, ConjectureReport, OptimizeOptions,
    OptimizeResult, OptimizerError, ScheduleBracket, SplitProperty, Verdict, Witness,
};
