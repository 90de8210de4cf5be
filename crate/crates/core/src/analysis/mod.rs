//! Run execution, convergence estimates, the δ/Δ machinery and the bound
//! auditors.

mod audit;
mod delta;
mod effort;
mod run;

pub use audit::{audit_bounds, bound_agent, epsilon_decrement, AuditOptions, AuditReport, BoundCheck, EpsilonRow};
pub use delta::{
    delta_bound_scan, delta_of_agent, delta_of_path, min_opinion_agent, DeltaScan, OccurrenceIndex,
};
pub use effort::{c_block_growth, growth_failures, min_effort, seesaw_blocks, SeesawBlock};
pub use run::{convergence, execute, simulate_stream, ConvergenceReport, RunTrace, StreamSummary};

/// Names of the audited bounds, as they appear in reports.
pub mod bounds {
    pub use super::audit::{DIRECT, EPSILON, EXTREMES, MONOTONE, NETWORK, N_STEP, ONE_STEP, PATH};
}

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::fairness::FairnessError;
use crate::words::SchedulerError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Fairness(#[from] FairnessError),
    #[error("invariant violated at step {step}: {message}")]
    Invariant { step: usize, message: String },
    #[error("trace is empty")]
    EmptyTrace,
    #[error("malformed trace: {0}")]
    Shape(String),
    #[error("{0}")]
    Parameter(String),
    #[error("not a seesaw trace: {0}")]
    NotSeesaw(String),
}
