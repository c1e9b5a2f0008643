//! The polynomial family: frame, residue data, intervals, the `w_i`, the CRT
//! constant and the linear forms, together with plan validation.

mod frame;
mod plan;
mod ratio;
mod validate;

use thiserror::Error;

use crate::approx::ApproxError;
use crate::ntkernel::CrtError;
use crate::tuples::TupleError;

pub use frame::{compute_frame, compute_offsets, compute_r, row_value, Frame, Offsets};
pub use plan::{
    build_plan, plan_for_goal, ConstructionPlan, Interval, LinearPolynomial, PlanOptions, RatioStrategy, WFactor,
    PLAN_VERSION,
};
pub use ratio::{phi_map, psi_map, ratio_to_value_targets, to_anchored, Goal, GoalCheck, RatioForm};
pub use validate::{validate_plan, CheckResult, ValidationReport};

pub(crate) use ratio::relative_error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error("betas are not admissible")]
    Inadmissible,
    #[error("target {0} must be positive")]
    TargetNotPositive(usize),
    #[error("expected {expected} targets, got {got}")]
    TargetCount { expected: usize, got: usize },
    #[error("target {index} = {target} exceeds the reachable radius r = {r}")]
    TargetAboveRadius { index: usize, target: String, r: String },
    #[error("target {index} = {target} is not below the row value {row}")]
    TargetAboveRow { index: usize, target: String, row: String },
    #[error("epsilon must lie strictly between 0 and 1")]
    EpsilonOutOfRange,
    #[error("interval {0} is empty after clipping to (0, 1)")]
    DegenerateInterval(usize),
    #[error("approximation failed: {0}")]
    Approx(#[from] ApproxError),
    #[error("congruence system failed: {0}")]
    Crt(String),
    #[error("plan failed validation: {0}")]
    Invalid(String),
}

impl From<CrtError> for PlanError {
    fn from(e: CrtError) -> Self {
        PlanError::Crt(e.to_string())
    }
}
