use super::search::{projected_gradient, BlockSimplex, DescentSettings};
use super::{penalized_cost, total_lqr, AllocationResult, Decision, OptimizeError, SolveStatus, SolverTrace};
use crate::control::RateCostModel;
use crate::exec::Execution;
use crate::linkgeom::{capacity_bps, shannon_rate_bps, LinkParams};
use crate::pipeline::{cycle_outcome, CycleRates, LoopBudget, LoopOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultiScheme {
    /// Minimise the summed LQR cost over powers and frequencies.
    TaskOrientedJoint,
    /// Water-fill power for the sum downlink rate; compute follows uplink load.
    MaxThroughputJoint,
    /// Equal power; optimise compute frequencies only.
    ComputeOnlyEqualComm,
}

impl MultiScheme {
    pub const ALL: [MultiScheme; 3] = [
        MultiScheme::TaskOrientedJoint,
        MultiScheme::MaxThroughputJoint,
        MultiScheme::ComputeOnlyEqualComm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MultiScheme::TaskOrientedJoint => "task_oriented_joint",
            MultiScheme::MaxThroughputJoint => "max_throughput_joint",
            MultiScheme::ComputeOnlyEqualComm => "compute_only_equal_comm",
        }
    }
}

/// One robot's closed loop: the sensor uplink, the command downlink (its
/// bandwidth is the robot's fixed share; power is a decision) and its plant.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotLoop {
    pub uplink: LinkParams,
    pub downlink: LinkParams,
    pub model: RateCostModel,
    pub uplink_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Channel {
    uplink_rate_bps: f64,
    t_up_s: f64,
    t_prop_s: f64,
    downlink_gain: f64,
    noise_density: f64,
    downlink_bandwidth_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub restarts: usize,
    pub descent: DescentSettings,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            descent: DescentSettings::default(),
            seed: 1,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiLoopProblem {
    robots: Vec<RobotLoop>,
    channels: Vec<Channel>,
    pub total_power_w: f64,
    pub total_compute_cps: f64,
    pub budget: LoopBudget,
    pub scheme: MultiScheme,
    pub options: SolverOptions,
}

impl MultiLoopProblem {
    pub fn new(
        robots: Vec<RobotLoop>,
        total_power_w: f64,
        total_compute_cps: f64,
        budget: LoopBudget,
        scheme: MultiScheme,
        options: SolverOptions,
    ) -> Result<Self, OptimizeError> {
        if robots.is_empty() {
            return Err(OptimizeError::Invalid("at least one robot is required".into()));
        }
        for (name, v) in [
            ("total_power_w", total_power_w),
            ("total_compute_cps", total_compute_cps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(OptimizeError::Invalid(format!("{name} must be positive")));
            }
        }
        if options.restarts == 0 {
            return Err(OptimizeError::Invalid("restarts must be at least 1".into()));
        }
        budget.validate()?;
        let mut channels = Vec::with_capacity(robots.len());
        for (i, r) in robots.iter().enumerate() {
            r.uplink.validate()?;
            r.downlink.validate()?;
            if !(r.uplink_bits.is_finite() && r.uplink_bits > 0.0) {
                return Err(OptimizeError::Invalid(format!(
                    "robot {i}: uplink_bits must be positive"
                )));
            }
            let period = r.model.plant().sample_period_s();
            if (period - budget.cycle_period_s).abs() > 1e-12 * budget.cycle_period_s {
                return Err(crate::pipeline::PipelineError::PeriodMismatch {
                    plant_s: period,
                    cycle_s: budget.cycle_period_s,
                }
                .into());
            }
            let uplink_rate_bps = shannon_rate_bps(&r.uplink)?;
            channels.push(Channel {
                uplink_rate_bps,
                t_up_s: r.uplink_bits / uplink_rate_bps,
                t_prop_s: budget.propagation_s(&r.uplink, &r.downlink),
                downlink_gain: r.downlink.channel_gain(),
                noise_density: r.downlink.noise_density(),
                downlink_bandwidth_hz: r.downlink.bandwidth_hz,
            });
        }
        Ok(Self {
            robots,
            channels,
            total_power_w,
            total_compute_cps,
            budget,
            scheme,
            options,
        })
    }

    pub fn robots(&self) -> &[RobotLoop] {
        &self.robots
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn with_scheme(&self, scheme: MultiScheme) -> Self {
        Self {
            scheme,
            ..self.clone()
        }
    }

    pub fn with_totals(&self, total_power_w: f64, total_compute_cps: f64) -> Self {
        Self {
            total_power_w,
            total_compute_cps,
            ..self.clone()
        }
    }

    /// Downlink Shannon rate of robot `i` at transmit power `power_w`.
    pub fn downlink_rate_bps(&self, i: usize, power_w: f64) -> f64 {
        let c = &self.channels[i];
        capacity_bps(
            power_w.max(0.0) * c.downlink_gain,
            c.noise_density,
            c.downlink_bandwidth_hz,
        )
    }

    /// Cycle of robot `i`: fixed uplink payload, compute at `compute_cps`,
    /// downlink open for whatever time remains.
    pub fn robot_outcome(&self, i: usize, power_w: f64, compute_cps: f64) -> LoopOutcome {
        let c = &self.channels[i];
        let rates = CycleRates {
            uplink_rate_bps: c.uplink_rate_bps,
            downlink_rate_bps: self.downlink_rate_bps(i, power_w),
            t_prop_s: c.t_prop_s,
        };
        let budget = self.budget.with_compute_rate(compute_cps.max(f64::MIN_POSITIVE));
        let t_comp = budget.cycles_per_bit * self.robots[i].uplink_bits / budget.compute_rate_cps;
        let t_down = (budget.cycle_period_s - c.t_prop_s - c.t_up_s - t_comp).max(0.0);
        cycle_outcome(&rates, &budget, &self.robots[i].model, c.t_up_s, t_down)
    }

    fn robot_cost(&self, i: usize, power_w: f64, compute_cps: f64) -> f64 {
        let out = self.robot_outcome(i, power_w, compute_cps);
        penalized_cost(&out, &self.robots[i].model, &self.budget)
    }

    /// Summed penalised LQR cost of a decision.
    pub fn total_cost(&self, powers_w: &[f64], compute_cps: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| self.robot_cost(i, powers_w[i], compute_cps[i]))
            .sum()
    }

    pub fn sum_rate_bps(&self, powers_w: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| self.downlink_rate_bps(i, powers_w[i]))
            .sum()
    }

    pub fn equal_powers(&self) -> Vec<f64> {
        vec![self.total_power_w / self.len() as f64; self.len()]
    }

    pub fn equal_compute(&self) -> Vec<f64> {
        vec![self.total_compute_cps / self.len() as f64; self.len()]
    }

    /// Compute shares proportional to each robot's uplink load.
    pub fn load_proportional_compute(&self) -> Vec<f64> {
        let total: f64 = self.robots.iter().map(|r| r.uplink_bits).sum();
        self.robots
            .iter()
            .map(|r| self.total_compute_cps * r.uplink_bits / total)
            .collect()
    }

    /// Power split maximising the sum downlink rate.
    pub fn water_filling_powers(&self) -> Vec<f64> {
        // P_i = max(0, B_i mu - N0 B_i / g_i)
        let floors: Vec<f64> = self
            .channels
            .iter()
            .map(|c| c.noise_density * c.downlink_bandwidth_hz / c.downlink_gain)
            .collect();
        let bw: Vec<f64> = self.channels.iter().map(|c| c.downlink_bandwidth_hz).collect();
        let used = |mu: f64| -> f64 { floors.iter().zip(&bw).map(|(f, b)| (b * mu - f).max(0.0)).sum() };
        let mut hi = 1.0;
        while used(hi) < self.total_power_w {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if used(mid) < self.total_power_w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut p: Vec<f64> = floors
            .iter()
            .zip(&bw)
            .map(|(f, b)| (b * hi - f).max(0.0))
            .collect();
        let s: f64 = p.iter().sum();
        if s > 0.0 {
            for v in &mut p {
                *v *= self.total_power_w / s;
            }
        }
        p
    }

    pub(crate) fn assemble(
        &self,
        powers_w: Vec<f64>,
        compute_cps: Vec<f64>,
        trace: SolverTrace,
    ) -> AllocationResult {
        let outcomes: Vec<LoopOutcome> = (0..self.len())
            .map(|i| self.robot_outcome(i, powers_w[i], compute_cps[i]))
            .collect();
        let penalized_lqr = self.total_cost(&powers_w, &compute_cps);
        let objective_value = match self.scheme {
            MultiScheme::MaxThroughputJoint => self.sum_rate_bps(&powers_w),
            _ => penalized_lqr,
        };
        let lqr = total_lqr(&outcomes);
        let status = if !trace.converged {
            SolveStatus::NonConvergent
        } else if self.scheme != MultiScheme::MaxThroughputJoint && !lqr.is_finite() {
            SolveStatus::AllInfeasible
        } else {
            SolveStatus::Converged
        };
        AllocationResult {
            decision: Decision::PowerCompute {
                powers_w,
                compute_cps,
            },
            per_loop_outcomes: outcomes,
            objective_value,
            lqr,
            penalized_lqr,
            trace,
            status,
        }
    }

    fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    }

    fn restart_rng(&self, restart: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed);
        rng.set_stream(restart as u64);
        rng
    }

    /// Run the restarts of a descent over normalised shares and keep the best.
    fn descend<F>(&self, dim: usize, blocks: usize, objective: F) -> (Vec<f64>, SolverTrace)
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let n = self.len();
        let set = BlockSimplex {
            blocks: (0..blocks).map(|k| (k * n, (k + 1) * n, 1.0)).collect(),
        };
        let runs = self.options.execution.map(self.options.restarts, |k| {
            let start: Vec<f64> = if k == 0 {
                vec![1.0 / n as f64; dim]
            } else {
                let mut rng = self.restart_rng(k);
                (0..blocks)
                    .flat_map(|_| Self::random_simplex_point(&mut rng, n))
                    .collect()
            };
            projected_gradient(&objective, &start, &set, &self.options.descent)
        });
        let mut trace = SolverTrace {
            restarts: runs.len(),
            ..SolverTrace::default()
        };
        let mut best: Option<&super::search::DescentResult> = None;
        for r in &runs {
            trace.iterations += r.iterations;
            trace.evaluations += r.evaluations;
            trace.converged |= r.converged;
            if best.is_none_or(|b| r.value < b.value) {
                best = Some(r);
            }
        }
        (best.expect("at least one restart").x.clone(), trace)
    }

    fn scale(shares: &[f64], total: f64) -> Vec<f64> {
        shares.iter().map(|s| s * total).collect()
    }

    pub fn solve(&self) -> AllocationResult {
        let n = self.len();
        match self.scheme {
            MultiScheme::MaxThroughputJoint => self.assemble(
                self.water_filling_powers(),
                self.load_proportional_compute(),
                SolverTrace {
                    iterations: 200,
                    evaluations: 200,
                    restarts: 1,
                    converged: true,
                },
            ),
            MultiScheme::ComputeOnlyEqualComm => {
                let powers = self.equal_powers();
                let (shares, trace) = self.descend(n, 1, |x| {
                    self.total_cost(&powers, &Self::scale(x, self.total_compute_cps))
                });
                let compute = Self::scale(&shares, self.total_compute_cps);
                self.assemble(powers, compute, trace)
            }
            MultiScheme::TaskOrientedJoint => {
                let (shares, trace) = self.descend(2 * n, 2, |x| {
                    self.total_cost(
                        &Self::scale(&x[..n], self.total_power_w),
                        &Self::scale(&x[n..], self.total_compute_cps),
                    )
                });
                let powers = Self::scale(&shares[..n], self.total_power_w);
                let compute = Self::scale(&shares[n..], self.total_compute_cps);
                self.assemble(powers, compute, trace)
            }
        }
    }
}

/// Joint power and compute allocation under the problem's scheme; the result
/// is re-scored under the summed LQR cost.
pub fn solve_multi_loop(problem: &MultiLoopProblem) -> AllocationResult {
    problem.solve()
}

fn check_grid(name: &str, grid: &[f64]) -> Result<(), OptimizeError> {
    if grid.is_empty() {
        return Err(OptimizeError::Invalid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(OptimizeError::Invalid(format!("{name} grid must be positive")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OptimizeError::Invalid(format!("{name} grid must be ascending")));
    }
    Ok(())
}

/// Every scheme at every total power; outer index follows `powers_w`,
/// inner index follows [`MultiScheme::ALL`].
pub fn power_sweep(
    problem: &MultiLoopProblem,
    powers_w: &[f64],
) -> Result<Vec<Vec<AllocationResult>>, OptimizeError> {
    check_grid("power", powers_w)?;
    let jobs: Vec<(usize, MultiScheme)> = (0..powers_w.len())
        .flat_map(|i| MultiScheme::ALL.into_iter().map(move |s| (i, s)))
        .collect();
    let flat = problem.options.execution.map(jobs.len(), |j| {
        let (i, s) = jobs[j];
        problem
            .with_totals(powers_w[i], problem.total_compute_cps)
            .with_scheme(s)
            .solve()
    });
    Ok(flat.chunks(MultiScheme::ALL.len()).map(|c| c.to_vec()).collect())
}

/// Optimal task-oriented objective on a power x compute grid; rows follow
/// `power_grid`, columns `compute_grid`.
pub fn sweep_contour(
    problem: &MultiLoopProblem,
    power_grid: &[f64],
    compute_grid: &[f64],
) -> Result<Vec<Vec<f64>>, OptimizeError> {
    Ok(contour_results(problem, power_grid, compute_grid)?
        .into_iter()
        .map(|row| row.into_iter().map(|r| r.objective_value).collect())
        .collect())
}

/// Full task-oriented results behind [`sweep_contour`].
pub fn contour_results(
    problem: &MultiLoopProblem,
    power_grid: &[f64],
    compute_grid: &[f64],
) -> Result<Vec<Vec<AllocationResult>>, OptimizeError> {
    check_grid("power", power_grid)?;
    check_grid("compute", compute_grid)?;
    let cols = compute_grid.len();
    let base = problem.with_scheme(MultiScheme::TaskOrientedJoint);
    let flat = problem.options.execution.map(power_grid.len() * cols, |k| {
        base.with_totals(power_grid[k / cols], compute_grid[k % cols])
            .solve()
    });
    Ok(flat.chunks(cols).map(|c| c.to_vec()).collect())
}
