//! Exhaustive grid search used to validate the solvers.

use super::multi::{MultiLoopProblem, MultiScheme};
use super::search::{argmin, linspace};
use super::single::SingleLoopProblem;
use super::{AllocationResult, OptimizeError, SolverTrace};

pub const MAX_ORACLE_DIMENSION: usize = 4;

pub trait GridOracle {
    /// Number of decision variables before slicing by the budget constraints.
    fn decision_dimension(&self) -> usize;

    fn grid_oracle(&self, resolution: usize) -> Result<AllocationResult, OptimizeError>;
}

pub fn grid_oracle<P: GridOracle>(problem: &P, resolution: usize) -> Result<AllocationResult, OptimizeError> {
    problem.grid_oracle(resolution)
}

fn check(dim: usize, resolution: usize) -> Result<(), OptimizeError> {
    if dim > MAX_ORACLE_DIMENSION {
        return Err(OptimizeError::DimensionTooLarge {
            got: dim,
            max: MAX_ORACLE_DIMENSION,
        });
    }
    if resolution == 0 {
        return Err(OptimizeError::Invalid("resolution must be at least 1".into()));
    }
    Ok(())
}

fn trace(evaluations: usize) -> SolverTrace {
    SolverTrace {
        iterations: 0,
        evaluations,
        restarts: 1,
        converged: true,
    }
}

impl GridOracle for SingleLoopProblem {
    fn decision_dimension(&self) -> usize {
        1
    }

    fn grid_oracle(&self, resolution: usize) -> Result<AllocationResult, OptimizeError> {
        check(1, resolution)?;
        let (lo, hi) = self.bandwidth_bounds();
        let grid = linspace(lo, hi, resolution);
        let values: Vec<f64> = grid.iter().map(|&x| self.objective_at(x)).collect();
        let (i, _) = argmin(&values).expect("non-empty grid");
        Ok(self.result_at(grid[i], trace(grid.len())))
    }
}

impl GridOracle for MultiLoopProblem {
    fn decision_dimension(&self) -> usize {
        match self.scheme {
            MultiScheme::TaskOrientedJoint => 2 * self.len(),
            _ => self.len(),
        }
    }

    /// Grid over the budget-binding face: with two robots the first robot's
    /// share is gridded and the second takes the remainder.
    fn grid_oracle(&self, resolution: usize) -> Result<AllocationResult, OptimizeError> {
        check(self.decision_dimension(), resolution)?;
        let n = self.len();
        let shares: Vec<Vec<f64>> = if n == 1 {
            vec![vec![1.0]]
        } else {
            linspace(0.0, 1.0, resolution)
                .into_iter()
                .map(|s| vec![s, 1.0 - s])
                .collect()
        };
        let split = |s: &[f64], total: f64| -> Vec<f64> { s.iter().map(|v| v * total).collect() };
        let (powers, compute, evaluations) = match self.scheme {
            MultiScheme::TaskOrientedJoint => {
                let mut best = (f64::INFINITY, 0, 0);
                for (i, ps) in shares.iter().enumerate() {
                    let p = split(ps, self.total_power_w);
                    for (j, fs) in shares.iter().enumerate() {
                        let v = self.total_cost(&p, &split(fs, self.total_compute_cps));
                        if v < best.0 {
                            best = (v, i, j);
                        }
                    }
                }
                (
                    split(&shares[best.1], self.total_power_w),
                    split(&shares[best.2], self.total_compute_cps),
                    shares.len() * shares.len(),
                )
            }
            MultiScheme::ComputeOnlyEqualComm => {
                let p = self.equal_powers();
                let values: Vec<f64> = shares
                    .iter()
                    .map(|fs| self.total_cost(&p, &split(fs, self.total_compute_cps)))
                    .collect();
                let (j, _) = argmin(&values).expect("non-empty grid");
                (p, split(&shares[j], self.total_compute_cps), shares.len())
            }
            MultiScheme::MaxThroughputJoint => {
                let values: Vec<f64> = shares
                    .iter()
                    .map(|ps| -self.sum_rate_bps(&split(ps, self.total_power_w)))
                    .collect();
                let (i, _) = argmin(&values).expect("non-empty grid");
                (
                    split(&shares[i], self.total_power_w),
                    self.load_proportional_compute(),
                    shares.len(),
                )
            }
        };
        Ok(self.assemble(powers, compute, trace(evaluations)))
    }
}
