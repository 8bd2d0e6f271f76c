//! Single-cycle store-and-forward timing: uplink transfer, on-board compute,
//! downlink transfer and propagation must all fit in one control period.

use crate::control::{cner_bps, is_stabilizable_at, RateCost, RateCostModel};
use crate::linkgeom::{shannon_rate_bps, LinkError, LinkParams};
use crate::units::SPEED_OF_LIGHT;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed when checking that stage latencies fit in the cycle.
pub const TIMING_SLACK_S: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("loop budget: {0}")]
    Budget(String),
    #[error("plant sample period {plant_s} s differs from cycle period {cycle_s} s")]
    PeriodMismatch { plant_s: f64, cycle_s: f64 },
    #[error("no time left for transfer: propagation {t_prop_s} s vs cycle {cycle_s} s")]
    NoBudget { t_prop_s: f64, cycle_s: f64 },
    #[error("stage times must be non-negative and finite")]
    NegativeTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopBudget {
    pub cycle_period_s: f64,
    pub cycles_per_bit: f64,
    pub compute_rate_cps: f64,
    pub extraction_ratio: f64,
    /// Count free-space propagation of both hops against the cycle.
    pub include_propagation: bool,
}

impl Default for LoopBudget {
    fn default() -> Self {
        Self {
            cycle_period_s: 0.02,
            cycles_per_bit: 100.0,
            compute_rate_cps: 1e10,
            extraction_ratio: 0.001,
            include_propagation: true,
        }
    }
}

impl LoopBudget {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(PipelineError::Budget(format!("{name} must be positive, got {v}")))
            }
        };
        pos("cycle_period_s", self.cycle_period_s)?;
        pos("cycles_per_bit", self.cycles_per_bit)?;
        pos("compute_rate_cps", self.compute_rate_cps)?;
        pos("extraction_ratio", self.extraction_ratio)?;
        if self.extraction_ratio > 1.0 {
            return Err(PipelineError::Budget(format!(
                "extraction_ratio must be <= 1, got {}",
                self.extraction_ratio
            )));
        }
        Ok(())
    }

    pub fn with_compute_rate(mut self, compute_rate_cps: f64) -> Self {
        self.compute_rate_cps = compute_rate_cps;
        self
    }

    pub fn propagation_s(&self, uplink: &LinkParams, downlink: &LinkParams) -> f64 {
        if self.include_propagation {
            propagation_delay_s(uplink.slant_range_m(), downlink.slant_range_m())
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleStatus {
    Delivered,
    /// Stage latencies overrun the cycle period.
    TimeInfeasible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopOutcome {
    pub uplink_rate_bps: f64,
    pub downlink_rate_bps: f64,
    pub t_up_s: f64,
    pub t_comp_s: f64,
    pub t_down_s: f64,
    pub t_prop_s: f64,
    pub effective_bits_per_cycle: f64,
    pub cner_bps: f64,
    pub stable: bool,
    pub lqr_cost: RateCost,
    pub status: CycleStatus,
}

impl LoopOutcome {
    pub fn total_latency_s(&self) -> f64 {
        self.t_up_s + self.t_comp_s + self.t_down_s + self.t_prop_s
    }
}

/// Rates and propagation delay of one loop, computed once from its links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRates {
    pub uplink_rate_bps: f64,
    pub downlink_rate_bps: f64,
    pub t_prop_s: f64,
}

impl CycleRates {
    pub fn from_links(
        uplink: &LinkParams,
        downlink: &LinkParams,
        budget: &LoopBudget,
    ) -> Result<Self, PipelineError> {
        Ok(Self {
            uplink_rate_bps: shannon_rate_bps(uplink)?,
            downlink_rate_bps: shannon_rate_bps(downlink)?,
            t_prop_s: budget.propagation_s(uplink, downlink),
        })
    }
}

pub fn propagation_delay_s(distance_up_m: f64, distance_down_m: f64) -> f64 {
    (distance_up_m + distance_down_m) / SPEED_OF_LIGHT
}

fn check_period(model: &RateCostModel, budget: &LoopBudget) -> Result<(), PipelineError> {
    let plant_s = model.plant().sample_period_s();
    if (plant_s - budget.cycle_period_s).abs() > 1e-12 * budget.cycle_period_s {
        return Err(PipelineError::PeriodMismatch {
            plant_s,
            cycle_s: budget.cycle_period_s,
        });
    }
    Ok(())
}

/// Evaluate one cycle with the uplink open for `t_up_s` and the downlink for
/// `t_down_s`.
pub fn evaluate_cycle(
    uplink: &LinkParams,
    downlink: &LinkParams,
    budget: &LoopBudget,
    model: &RateCostModel,
    t_up_s: f64,
    t_down_s: f64,
) -> Result<LoopOutcome, PipelineError> {
    budget.validate()?;
    check_period(model, budget)?;
    let rates = CycleRates::from_links(uplink, downlink, budget)?;
    evaluate_with_rates(&rates, budget, model, t_up_s, t_down_s)
}

/// [`evaluate_cycle`] with link rates already resolved.
pub fn evaluate_with_rates(
    rates: &CycleRates,
    budget: &LoopBudget,
    model: &RateCostModel,
    t_up_s: f64,
    t_down_s: f64,
) -> Result<LoopOutcome, PipelineError> {
    let ok = |t: f64| t.is_finite() && t >= 0.0;
    if !ok(t_up_s) || !ok(t_down_s) {
        return Err(PipelineError::NegativeTime);
    }
    Ok(cycle_outcome(rates, budget, model, t_up_s, t_down_s))
}

pub(crate) fn cycle_outcome(
    rates: &CycleRates,
    budget: &LoopBudget,
    model: &RateCostModel,
    t_up_s: f64,
    t_down_s: f64,
) -> LoopOutcome {
    let uplink_bits = rates.uplink_rate_bps * t_up_s;
    let t_comp_s = budget.cycles_per_bit * uplink_bits / budget.compute_rate_cps;
    let downlink_capacity = rates.downlink_rate_bps * t_down_s;
    let mut out = LoopOutcome {
        uplink_rate_bps: rates.uplink_rate_bps,
        downlink_rate_bps: rates.downlink_rate_bps,
        t_up_s,
        t_comp_s,
        t_down_s,
        t_prop_s: rates.t_prop_s,
        effective_bits_per_cycle: 0.0,
        cner_bps: 0.0,
        stable: false,
        lqr_cost: RateCost::Infeasible,
        status: CycleStatus::TimeInfeasible,
    };
    if out.total_latency_s() > budget.cycle_period_s + TIMING_SLACK_S {
        return out;
    }
    let bits = (budget.extraction_ratio * uplink_bits).min(downlink_capacity);
    out.status = CycleStatus::Delivered;
    out.effective_bits_per_cycle = bits;
    out.cner_bps = cner_bps(bits, budget.cycle_period_s);
    out.stable = is_stabilizable_at(model.plant(), out.cner_bps);
    out.lqr_cost = model.lqr_cost(bits);
    out
}

/// Time split that makes the extracted output exactly fill the downlink with
/// the whole remaining budget used.
pub fn balanced_times(
    uplink: &LinkParams,
    downlink: &LinkParams,
    budget: &LoopBudget,
    t_prop_s: f64,
) -> Result<(f64, f64), PipelineError> {
    budget.validate()?;
    let r_up = shannon_rate_bps(uplink)?;
    let r_down = shannon_rate_bps(downlink)?;
    balanced_times_for_rates(r_up, r_down, budget, t_prop_s)
}

pub fn balanced_times_for_rates(
    r_up: f64,
    r_down: f64,
    budget: &LoopBudget,
    t_prop_s: f64,
) -> Result<(f64, f64), PipelineError> {
    let available = budget.cycle_period_s - t_prop_s;
    if available.is_nan() || available <= 0.0 {
        return Err(PipelineError::NoBudget {
            t_prop_s,
            cycle_s: budget.cycle_period_s,
        });
    }
    let rho = budget.extraction_ratio;
    let per_up_second = 1.0 + budget.cycles_per_bit * r_up / budget.compute_rate_cps + rho * r_up / r_down;
    let t_up = available / per_up_second;
    let t_down = rho * r_up * t_up / r_down;
    Ok((t_up, t_down))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Plant;
    use crate::linkgeom::Geometry;
    use proptest::prelude::*;

    fn model(a: f64) -> RateCostModel {
        RateCostModel::new(Plant::scalar(a, 1.0, 1.0, 1.0, 1.0, 0.02).unwrap()).unwrap()
    }

    fn link(p: f64, gt: f64, gr: f64, b: f64) -> LinkParams {
        LinkParams {
            tx_power_w: p,
            tx_gain_dbi: gt,
            rx_gain_dbi: gr,
            carrier_freq_hz: 30e9,
            bandwidth_hz: b,
            noise_temperature_k: 290.0,
            geometry: Geometry::new(600e3, 90.0).unwrap(),
        }
    }

    fn rates(up: f64, down: f64) -> CycleRates {
        CycleRates {
            uplink_rate_bps: up,
            downlink_rate_bps: down,
            t_prop_s: 0.0,
        }
    }

    #[test]
    fn propagation_examples() {
        assert!((propagation_delay_s(600e3, 600e3) - 4.002_769_142_377_825e-3).abs() < 1e-15);
        assert_eq!(propagation_delay_s(0.0, 0.0), 0.0);
        assert_eq!(propagation_delay_s(SPEED_OF_LIGHT, 0.0), 1.0);
    }

    #[test]
    fn compute_time_from_paper_parameters() {
        let budget = LoopBudget::default();
        // 1 Mbit uplinked in 1 ms
        let out = cycle_outcome(&rates(1e9, 1e9), &budget, &model(2.0), 1e-3, 1e-3);
        assert!((out.t_comp_s - 0.01).abs() < 1e-15);
        assert_eq!(out.status, CycleStatus::Delivered);
    }

    #[test]
    fn extraction_of_one_bit_from_thousand() {
        let budget = LoopBudget::default();
        let out = cycle_outcome(&rates(1e6, 1e9), &budget, &model(0.5), 1e-3, 1e-3);
        assert!((out.effective_bits_per_cycle - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_uplink_time_is_unstable() {
        let out = cycle_outcome(&rates(1e6, 1e6), &LoopBudget::default(), &model(2.0), 0.0, 1e-3);
        assert_eq!(out.effective_bits_per_cycle, 0.0);
        assert!(!out.stable);
        assert_eq!(out.lqr_cost, RateCost::Infeasible);
    }

    #[test]
    fn overrun_is_time_infeasible() {
        let out = cycle_outcome(&rates(1e6, 1e6), &LoopBudget::default(), &model(0.5), 0.015, 0.01);
        assert_eq!(out.status, CycleStatus::TimeInfeasible);
        assert_eq!(out.effective_bits_per_cycle, 0.0);
        assert!(!out.stable);
    }

    #[test]
    fn evaluate_cycle_checks_inputs() {
        let up = link(0.2, 14.0, 38.5, 1e4);
        let down = link(20.0, 38.5, 14.0, 1e4);
        let budget = LoopBudget::default();
        let wrong = RateCostModel::new(Plant::scalar(2.0, 1.0, 1.0, 1.0, 1.0, 0.1).unwrap()).unwrap();
        assert!(matches!(
            evaluate_cycle(&up, &down, &budget, &wrong, 1e-3, 1e-3),
            Err(PipelineError::PeriodMismatch { .. })
        ));
        assert_eq!(
            evaluate_cycle(&up, &down, &budget, &model(2.0), -1.0, 1e-3),
            Err(PipelineError::NegativeTime)
        );
        let bad = LoopBudget {
            extraction_ratio: 1.5,
            ..budget
        };
        assert!(matches!(
            evaluate_cycle(&up, &down, &bad, &model(2.0), 1e-3, 1e-3),
            Err(PipelineError::Budget(_))
        ));
    }

    #[test]
    fn balanced_times_limits() {
        let budget = LoopBudget {
            extraction_ratio: 1.0,
            cycles_per_bit: 1e-30,
            ..LoopBudget::default()
        };
        let (tu, td) = balanced_times_for_rates(1e6, 1e6, &budget, 0.004).unwrap();
        assert!((tu - 0.008).abs() < 1e-15 && (td - 0.008).abs() < 1e-15);

        let tiny = LoopBudget {
            extraction_ratio: 1e-15,
            ..LoopBudget::default()
        };
        let (tu, td) = balanced_times_for_rates(1e6, 1e6, &tiny, 0.004).unwrap();
        assert!((tu - 0.016 / 1.01).abs() < 1e-12);
        assert!(td < 1e-16);

        assert!(matches!(
            balanced_times_for_rates(1e6, 1e6, &budget, 0.02),
            Err(PipelineError::NoBudget { .. })
        ));
    }

    #[test]
    fn balanced_times_paper_split_regression() {
        // 10 MHz split evenly, overhead geometry; independent evaluation of the linear
        // solve with mpmath.
        let up = link(0.2, 14.0, 38.5, 5e6);
        let down = link(20.0, 38.5, 14.0, 5e6);
        let budget = LoopBudget::default();
        let t_prop = budget.propagation_s(&up, &down);
        let (tu, td) = balanced_times(&up, &down, &budget, t_prop).unwrap();
        assert!((tu - BALANCED_T_UP).abs() < 1e-12, "{tu:.17e}");
        assert!((td - BALANCED_T_DOWN).abs() < 1e-15, "{td:.17e}");
        let out = evaluate_cycle(&up, &down, &budget, &model(2.0), tu, td).unwrap();
        assert!((out.total_latency_s() - 0.02).abs() < 1e-12);
    }

    const BALANCED_T_UP: f64 = 0.014_511_758_176_527_196;
    const BALANCED_T_DOWN: f64 = 3.575_308_964_180_343_5e-6;

    proptest! {
        #[test]
        fn balanced_beats_random_splits(
            r_up in 1e4f64..1e8,
            r_down in 1e4f64..1e8,
            rho in 1e-4f64..1.0,
            f in 1e8f64..1e11,
            seeds in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1000),
        ) {
            let budget = LoopBudget { extraction_ratio: rho, compute_rate_cps: f, ..LoopBudget::default() };
            let m = model(2.0);
            let r = CycleRates { uplink_rate_bps: r_up, downlink_rate_bps: r_down, t_prop_s: 0.004 };
            let (tu, td) = balanced_times_for_rates(r_up, r_down, &budget, r.t_prop_s).unwrap();
            let best = cycle_outcome(&r, &budget, &m, tu, td);
            prop_assert_eq!(best.status, CycleStatus::Delivered);
            prop_assert!(best.total_latency_s() <= budget.cycle_period_s + TIMING_SLACK_S);
            let avail = budget.cycle_period_s - r.t_prop_s;
            for (u, v) in seeds {
                let t_up = u * avail;
                let t_down = v * (avail - t_up);
                let o = cycle_outcome(&r, &budget, &m, t_up, t_down);
                if o.status == CycleStatus::Delivered {
                    prop_assert!(o.effective_bits_per_cycle <= best.effective_bits_per_cycle * (1.0 + 1e-12));
                    prop_assert!(o.total_latency_s() <= budget.cycle_period_s + TIMING_SLACK_S);
                    prop_assert!(o.effective_bits_per_cycle <= rho * r_up * t_up * (1.0 + 1e-15));
                    prop_assert!(o.effective_bits_per_cycle <= r_down * t_down * (1.0 + 1e-15));
                }
            }
        }
    }

    #[test]
    fn effective_bits_monotone_in_resources() {
        let m = model(2.0);
        let base = LoopBudget::default();
        let eff = |up: f64, down: f64, f: f64| {
            let b = base.with_compute_rate(f);
            let (tu, td) = balanced_times_for_rates(up, down, &b, 0.004).unwrap();
            cycle_outcome(&rates(up, down), &b, &m, tu, td).effective_bits_per_cycle
        };
        let grid = [1e4, 1e5, 1e6, 1e7, 1e8];
        for &x in &grid {
            for w in grid.windows(2) {
                assert!(eff(w[1], x, 1e10) >= eff(w[0], x, 1e10));
                assert!(eff(x, w[1], 1e10) >= eff(x, w[0], 1e10));
            }
            for w in [1e8, 1e9, 1e10, 1e11].windows(2) {
                assert!(eff(x, x, w[1]) >= eff(x, x, w[0]));
            }
        }
    }
}
