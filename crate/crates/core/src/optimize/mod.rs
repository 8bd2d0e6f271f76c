//! Resource allocation: the single-loop uplink/downlink bandwidth split and
//! the multi-loop joint downlink-power and compute-frequency allocation,
//! each paired with a brute-force grid oracle.

mod multi;
mod oracle;
pub mod search;
mod single;

pub use multi::{
    contour_results, power_sweep, solve_multi_loop, sweep_contour, MultiLoopProblem, MultiScheme, RobotLoop,
    SolverOptions,
};
pub use oracle::{grid_oracle, GridOracle, MAX_ORACLE_DIMENSION};
pub use single::{solve_single_loop, SingleLoopProblem, SingleObjective};

use crate::control::ControlError;
use crate::control::{RateCost, RateCostModel};
use crate::linkgeom::LinkError;
use crate::pipeline::{CycleStatus, LoopBudget, LoopOutcome, PipelineError};
use thiserror::Error;

/// Sentinel added to the objective of every loop whose cost is infeasible.
pub const INFEASIBLE_PENALTY: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("grid oracle supports at most {max} decision variables, got {got}")]
    DimensionTooLarge { got: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Bandwidth {
        uplink_hz: f64,
        downlink_hz: f64,
        t_up_s: f64,
        t_down_s: f64,
    },
    PowerCompute {
        powers_w: Vec<f64>,
        compute_cps: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// Best effort returned, but no decision makes every loop feasible.
    AllInfeasible,
    NonConvergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverTrace {
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub decision: Decision,
    pub per_loop_outcomes: Vec<LoopOutcome>,
    /// The scheme's own objective at the decision (minimised, or the sum
    /// rate for throughput schemes).
    pub objective_value: f64,
    /// Re-scored total LQR cost across loops.
    pub lqr: RateCost,
    /// Re-scored total LQR cost with infeasible loops replaced by the penalty.
    pub penalized_lqr: f64,
    pub trace: SolverTrace,
    pub status: SolveStatus,
}

/// LQR cost of one loop, or the penalty plus its distance to feasibility.
pub fn penalized_cost(outcome: &LoopOutcome, model: &RateCostModel, budget: &LoopBudget) -> f64 {
    match outcome.lqr_cost {
        RateCost::Finite(v) => v,
        RateCost::Infeasible => {
            let mut shortfall = (model.min_bits_per_step() - outcome.effective_bits_per_cycle).max(0.0);
            if outcome.status == CycleStatus::TimeInfeasible {
                let overrun = outcome.total_latency_s() - budget.cycle_period_s;
                shortfall += overrun.clamp(0.0, 10.0 * budget.cycle_period_s) / budget.cycle_period_s;
            }
            INFEASIBLE_PENALTY + shortfall
        }
    }
}

pub(crate) fn total_lqr(outcomes: &[LoopOutcome]) -> RateCost {
    let mut total = 0.0;
    for o in outcomes {
        match o.lqr_cost {
            RateCost::Finite(v) => total += v,
            RateCost::Infeasible => return RateCost::Infeasible,
        }
    }
    RateCost::Finite(total)
}
