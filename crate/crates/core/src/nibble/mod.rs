//! List and correspondence coloring solver.

pub mod brute;
pub mod lll;
pub mod params;
pub mod solve;
pub mod wcp;

use thiserror::Error;

pub use crate::coloring::verify_coloring;
pub use brute::brute_force;
pub use lll::{finish_lll, LllOptions, LllOutcome};
pub use params::{build_schedule, ParamSchedule, ScheduleError, WcpParams};
pub use solve::{solve, Policy, SolveFailure, SolveOptions, SolveReport, Stage};
pub use wcp::{wcp_round, RoundStats, WcpOutcome};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NibbleError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resample budget exhausted after {resamples} resamples")]
    BudgetExceeded { resamples: u64 },
    #[error("instance has {n} vertices; exhaustive search is limited to {max}")]
    TooLarge { n: usize, max: usize },
}
