//! Backward pump power allocation.
//!
//! Finds the smallest total pump power that brings every channel of a target
//! band back to its launch power at the span end, with the pump wavelengths
//! held fixed. Each candidate costs one Raman boundary value solve, so the
//! search is derivative free: a seeded differential-evolution population on a
//! penalized objective, then a compass search around the incumbent.

mod problem;
mod search;

pub use problem::{evaluate_recovery, PumpProblem, Recovery, RecoveryReport};
pub use search::{optimize_pumps, OptimizerOptions, PumpOutcome, SearchPhase, TraceEntry};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PumpError {
    #[error("invalid pump problem: {0}")]
    Problem(String),
    #[error(transparent)]
    Raman(#[from] qot_raman::RamanError),
    #[error(transparent)]
    Core(#[from] qot_core::CoreError),
}
