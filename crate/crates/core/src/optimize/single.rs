use super::search::{argmin, golden_section, linspace, LineMin};
use super::{penalized_cost, total_lqr, AllocationResult, Decision, OptimizeError, SolveStatus, SolverTrace};
use crate::control::{RateCost, RateCostModel};
use crate::linkgeom::{shannon_rate_bps, LinkParams};
use crate::pipeline::{balanced_times_for_rates, cycle_outcome, CycleRates, LoopBudget, LoopOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SingleObjective {
    /// Minimise the rate-limited LQR cost of the cycle.
    TaskOriented,
    /// Maximise `R_up + R_down`.
    MaxThroughput,
    /// Minimise the transfer time of one payload over each hop.
    MinLatency,
}

impl SingleObjective {
    pub const ALL: [SingleObjective; 3] = [
        SingleObjective::TaskOriented,
        SingleObjective::MinLatency,
        SingleObjective::MaxThroughput,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SingleObjective::TaskOriented => "task_oriented",
            SingleObjective::MaxThroughput => "max_throughput",
            SingleObjective::MinLatency => "min_latency",
        }
    }
}

/// Split of a total bandwidth between the uplink and the downlink of one loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleLoopProblem {
    pub total_bandwidth_hz: f64,
    pub uplink_template: LinkParams,
    pub downlink_template: LinkParams,
    pub budget: LoopBudget,
    pub model: RateCostModel,
    pub objective: SingleObjective,
    /// Payload timed on each hop by [`SingleObjective::MinLatency`].
    pub fixed_payload_bits: f64,
}

const COARSE_POINTS: usize = 101;
const DENSE_POINTS: usize = 10_001;
const UNIMODAL_TOL: f64 = 1e-3;

impl SingleLoopProblem {
    pub fn new(
        total_bandwidth_hz: f64,
        uplink_template: LinkParams,
        downlink_template: LinkParams,
        budget: LoopBudget,
        model: RateCostModel,
        objective: SingleObjective,
        fixed_payload_bits: f64,
    ) -> Result<Self, OptimizeError> {
        let p = Self {
            total_bandwidth_hz,
            uplink_template,
            downlink_template,
            budget,
            model,
            objective,
            fixed_payload_bits,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        if !(self.total_bandwidth_hz.is_finite() && self.total_bandwidth_hz > 0.0) {
            return Err(OptimizeError::Invalid(
                "total_bandwidth_hz must be positive".into(),
            ));
        }
        if self.objective == SingleObjective::MinLatency
            && !(self.fixed_payload_bits.is_finite() && self.fixed_payload_bits > 0.0)
        {
            return Err(OptimizeError::Invalid(
                "fixed_payload_bits must be positive".into(),
            ));
        }
        let half = self.total_bandwidth_hz / 2.0;
        self.uplink_template.with_bandwidth(half).validate()?;
        self.downlink_template.with_bandwidth(half).validate()?;
        self.budget.validate()?;
        let t_prop = self.t_prop_s();
        if t_prop >= self.budget.cycle_period_s {
            return Err(crate::pipeline::PipelineError::NoBudget {
                t_prop_s: t_prop,
                cycle_s: self.budget.cycle_period_s,
            }
            .into());
        }
        let period = self.model.plant().sample_period_s();
        if (period - self.budget.cycle_period_s).abs() > 1e-12 * self.budget.cycle_period_s {
            return Err(crate::pipeline::PipelineError::PeriodMismatch {
                plant_s: period,
                cycle_s: self.budget.cycle_period_s,
            }
            .into());
        }
        Ok(())
    }

    pub fn with_objective(&self, objective: SingleObjective) -> Self {
        Self {
            objective,
            ..self.clone()
        }
    }

    fn t_prop_s(&self) -> f64 {
        self.budget
            .propagation_s(&self.uplink_template, &self.downlink_template)
    }

    /// Search interval for the uplink bandwidth.
    pub fn bandwidth_bounds(&self) -> (f64, f64) {
        let delta = 1e-6 * self.total_bandwidth_hz;
        (delta, self.total_bandwidth_hz - delta)
    }

    pub fn rates_at(&self, uplink_hz: f64) -> (f64, f64) {
        let up = self.uplink_template.with_bandwidth(uplink_hz);
        let down = self
            .downlink_template
            .with_bandwidth(self.total_bandwidth_hz - uplink_hz);
        // templates are validated, so the rates exist
        (
            shannon_rate_bps(&up).unwrap_or(0.0),
            shannon_rate_bps(&down).unwrap_or(0.0),
        )
    }

    /// Cycle outcome with the given uplink bandwidth and balanced stage times.
    pub fn outcome_at(&self, uplink_hz: f64) -> LoopOutcome {
        let (r_up, r_down) = self.rates_at(uplink_hz);
        let rates = CycleRates {
            uplink_rate_bps: r_up,
            downlink_rate_bps: r_down,
            t_prop_s: self.t_prop_s(),
        };
        let (t_up, t_down) =
            balanced_times_for_rates(r_up, r_down, &self.budget, rates.t_prop_s).unwrap_or((0.0, 0.0));
        cycle_outcome(&rates, &self.budget, &self.model, t_up, t_down)
    }

    /// The scheme's objective as a quantity to minimise.
    pub fn objective_at(&self, uplink_hz: f64) -> f64 {
        match self.objective {
            SingleObjective::TaskOriented => {
                penalized_cost(&self.outcome_at(uplink_hz), &self.model, &self.budget)
            }
            SingleObjective::MaxThroughput => {
                let (u, d) = self.rates_at(uplink_hz);
                -(u + d)
            }
            SingleObjective::MinLatency => {
                let (u, d) = self.rates_at(uplink_hz);
                self.fixed_payload_bits / u + self.fixed_payload_bits / d
            }
        }
    }

    /// Objective in reporting units (sum rate is reported positive).
    pub fn reported_objective(&self, minimised: f64) -> f64 {
        match self.objective {
            SingleObjective::MaxThroughput => -minimised,
            _ => minimised,
        }
    }

    pub(crate) fn result_at(&self, uplink_hz: f64, trace: SolverTrace) -> AllocationResult {
        let outcome = self.outcome_at(uplink_hz);
        let value = self.objective_at(uplink_hz);
        let status =
            if self.objective == SingleObjective::TaskOriented && outcome.lqr_cost == RateCost::Infeasible {
                SolveStatus::AllInfeasible
            } else if trace.converged {
                SolveStatus::Converged
            } else {
                SolveStatus::NonConvergent
            };
        AllocationResult {
            decision: Decision::Bandwidth {
                uplink_hz,
                downlink_hz: self.total_bandwidth_hz - uplink_hz,
                t_up_s: outcome.t_up_s,
                t_down_s: outcome.t_down_s,
            },
            lqr: total_lqr(std::slice::from_ref(&outcome)),
            penalized_lqr: penalized_cost(&outcome, &self.model, &self.budget),
            per_loop_outcomes: vec![outcome],
            objective_value: self.reported_objective(value),
            trace,
            status,
        }
    }

    pub fn solve(&self) -> AllocationResult {
        let (lo, hi) = self.bandwidth_bounds();
        let f = |x: f64| self.objective_at(x);
        let width = 1e-8 * self.total_bandwidth_hz;
        let mut best: LineMin = golden_section(f, lo, hi, width);
        let mut evaluations = best.evaluations;
        let mut iterations = best.iterations;

        let coarse = linspace(lo, hi, COARSE_POINTS);
        let coarse_vals: Vec<f64> = coarse.iter().map(|&x| f(x)).collect();
        evaluations += coarse.len();
        let (ci, cv) = argmin(&coarse_vals).expect("non-empty grid");
        if cv < best.value - UNIMODAL_TOL * best.value.abs() {
            let dense = linspace(lo, hi, DENSE_POINTS);
            let dense_vals: Vec<f64> = dense.iter().map(|&x| f(x)).collect();
            evaluations += dense.len();
            let (di, dv) = argmin(&dense_vals).expect("non-empty grid");
            let a = dense[di.saturating_sub(1)];
            let b = dense[(di + 1).min(dense.len() - 1)];
            let local = golden_section(f, a, b, width);
            evaluations += local.evaluations;
            iterations += local.iterations;
            best = if local.value <= dv {
                local
            } else {
                LineMin {
                    x: dense[di],
                    value: dv,
                    iterations,
                    evaluations,
                }
            };
        } else if cv < best.value {
            best = LineMin {
                x: coarse[ci],
                value: cv,
                ..best
            };
        }
        self.result_at(
            best.x,
            SolverTrace {
                iterations,
                evaluations,
                restarts: 1,
                converged: true,
            },
        )
    }
}

/// Solve the single-loop split under the problem's objective; the result is
/// re-scored under the LQR cost regardless of objective.
pub fn solve_single_loop(problem: &SingleLoopProblem) -> AllocationResult {
    problem.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Plant;
    use crate::linkgeom::Geometry;

    fn link(p: f64, gt: f64, gr: f64) -> LinkParams {
        LinkParams {
            tx_power_w: p,
            tx_gain_dbi: gt,
            rx_gain_dbi: gr,
            carrier_freq_hz: 30e9,
            bandwidth_hz: 1.0,
            noise_temperature_k: 290.0,
            geometry: Geometry::new(600e3, 90.0).unwrap(),
        }
    }

    fn problem(a: f64, objective: SingleObjective) -> SingleLoopProblem {
        SingleLoopProblem::new(
            20e3,
            link(0.2, 14.0, 38.5),
            link(20.0, 38.5, 14.0),
            LoopBudget::default(),
            RateCostModel::new(Plant::scalar(a, 1.0, 1.0, 1.0, 1.0, 0.02).unwrap()).unwrap(),
            objective,
            1e4,
        )
        .unwrap()
    }

    #[test]
    fn symmetric_links_split_evenly_for_throughput() {
        let mut p = problem(2.0, SingleObjective::MaxThroughput);
        p.downlink_template = p.uplink_template;
        let r = p.solve();
        let Decision::Bandwidth {
            uplink_hz,
            downlink_hz,
            ..
        } = r.decision
        else {
            panic!()
        };
        assert!((uplink_hz - downlink_hz).abs() / p.total_bandwidth_hz < 1e-6);
    }

    #[test]
    fn bandwidth_constraint_holds() {
        for obj in SingleObjective::ALL {
            let p = problem(2.0, obj);
            let r = p.solve();
            let Decision::Bandwidth {
                uplink_hz,
                downlink_hz,
                ..
            } = r.decision
            else {
                panic!()
            };
            assert!(((uplink_hz + downlink_hz) - p.total_bandwidth_hz).abs() <= 1e-9 * p.total_bandwidth_hz);
            assert!(uplink_hz > 0.0 && downlink_hz > 0.0);
            let re = p.reported_objective(p.objective_at(uplink_hz));
            assert_eq!(re, r.objective_value);
        }
    }

    #[test]
    fn stable_plant_all_finite() {
        for obj in SingleObjective::ALL {
            let r = problem(0.9, obj).solve();
            assert!(r.lqr.is_finite());
            assert!(r.per_loop_outcomes[0].stable);
        }
    }

    #[test]
    fn hopeless_plant_reports_all_infeasible() {
        let r = problem(1e6, SingleObjective::TaskOriented).solve();
        assert_eq!(r.status, SolveStatus::AllInfeasible);
        assert_eq!(r.lqr, RateCost::Infeasible);
    }

    #[test]
    fn invalid_problems_rejected() {
        let mut p = problem(2.0, SingleObjective::MinLatency);
        p.fixed_payload_bits = 0.0;
        assert!(p.validate().is_err());
        let mut q = problem(2.0, SingleObjective::TaskOriented);
        q.total_bandwidth_hz = -1.0;
        assert!(q.validate().is_err());
    }
}
