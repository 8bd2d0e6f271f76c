//! Discrete-time linear plants, the Riccati equation, and the rate-limited
//! LQR cost used as the task-oriented objective.
//!
//! The rate/cost relation is the scalar sequential rate-distortion form: with
//! `R` bits per control step the steady-state estimation variance is
//! `w / (2^{2R} - a^2)`, and the closed-loop cost is the full-information LQR
//! cost plus a sensitivity times that variance. Below the data-rate threshold
//! `R <= log2|a|` no finite variance exists and the cost is [`RateCost::Infeasible`].

use nalgebra::DMatrix;
use std::f64::consts::LN_2;
use thiserror::Error;

pub const DEFAULT_DARE_TOL: f64 = 1e-12;
pub const DEFAULT_DARE_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0} must be symmetric positive semidefinite")]
    NotPsd(&'static str),
    #[error("input weight r_u must be symmetric positive definite")]
    NotPd,
    #[error("sample period must be positive, got {0}")]
    SamplePeriod(f64),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("Riccati iteration did not converge after {iterations} iterations (relative change {change:e})")]
    NonConvergent { iterations: usize, change: f64 },
    #[error("only scalar or fully diagonal plants are supported by the rate-cost model")]
    UnsupportedPlant,
}

/// `x_{k+1} = a x_k + b u_k + w_k`, `w ~ N(0, w_cov)`, stage cost `x'q x + u'r_u u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    w_cov: DMatrix<f64>,
    q: DMatrix<f64>,
    r_u: DMatrix<f64>,
    sample_period_s: f64,
}

fn check_finite(name: &'static str, m: &DMatrix<f64>) -> Result<(), ControlError> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ControlError::NonFinite(name))
    }
}

fn symmetric_min_eig(m: &DMatrix<f64>) -> Option<f64> {
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return None;
            }
        }
    }
    Some(m.clone().symmetric_eigenvalues().min())
}

impl Plant {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        w_cov: DMatrix<f64>,
        q: DMatrix<f64>,
        r_u: DMatrix<f64>,
        sample_period_s: f64,
    ) -> Result<Self, ControlError> {
        let n = a.nrows();
        if a.ncols() != n || n == 0 {
            return Err(ControlError::Dimension("a must be square and non-empty".into()));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(ControlError::Dimension(format!("b must have {n} rows")));
        }
        let m = b.ncols();
        for (name, mat, dim) in [("w_cov", &w_cov, n), ("q", &q, n), ("r_u", &r_u, m)] {
            if mat.nrows() != dim || mat.ncols() != dim {
                return Err(ControlError::Dimension(format!("{name} must be {dim}x{dim}")));
            }
        }
        for (name, mat) in [("a", &a), ("b", &b), ("w_cov", &w_cov), ("q", &q), ("r_u", &r_u)] {
            check_finite(name, mat)?;
        }
        for (name, mat) in [("w_cov", &w_cov), ("q", &q)] {
            match symmetric_min_eig(mat) {
                Some(e) if e >= -1e-12 => {}
                _ => return Err(ControlError::NotPsd(name)),
            }
        }
        match symmetric_min_eig(&r_u) {
            Some(e) if e > 0.0 => {}
            _ => return Err(ControlError::NotPd),
        }
        if !(sample_period_s.is_finite() && sample_period_s > 0.0) {
            return Err(ControlError::SamplePeriod(sample_period_s));
        }
        Ok(Self {
            a,
            b,
            w_cov,
            q,
            r_u,
            sample_period_s,
        })
    }

    pub fn scalar(
        a: f64,
        b: f64,
        w_cov: f64,
        q: f64,
        r_u: f64,
        sample_period_s: f64,
    ) -> Result<Self, ControlError> {
        let s = |v: f64| DMatrix::from_element(1, 1, v);
        Self::new(s(a), s(b), s(w_cov), s(q), s(r_u), sample_period_s)
    }

    /// Fully decoupled plant: one scalar mode per entry.
    pub fn diagonal(
        a: &[f64],
        b: &[f64],
        w_cov: &[f64],
        q: &[f64],
        r_u: &[f64],
        sample_period_s: f64,
    ) -> Result<Self, ControlError> {
        let n = a.len();
        if [b.len(), w_cov.len(), q.len(), r_u.len()].iter().any(|&l| l != n) {
            return Err(ControlError::Dimension(
                "diagonal entries must have equal length".into(),
            ));
        }
        let d = |v: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v));
        Self::new(d(a), d(b), d(w_cov), d(q), d(r_u), sample_period_s)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn w_cov(&self) -> &DMatrix<f64> {
        &self.w_cov
    }
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }
    pub fn r_u(&self) -> &DMatrix<f64> {
        &self.r_u
    }
    pub fn sample_period_s(&self) -> f64 {
        self.sample_period_s
    }
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn with_sample_period(mut self, sample_period_s: f64) -> Result<Self, ControlError> {
        if !(sample_period_s.is_finite() && sample_period_s > 0.0) {
            return Err(ControlError::SamplePeriod(sample_period_s));
        }
        self.sample_period_s = sample_period_s;
        Ok(self)
    }

    /// True when every matrix of the plant is square and diagonal, so the
    /// loop decomposes into independent scalar modes.
    pub fn is_decoupled(&self) -> bool {
        let diag = |m: &DMatrix<f64>| {
            m.is_square() && (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
        };
        [&self.a, &self.b, &self.w_cov, &self.q, &self.r_u]
            .iter()
            .all(|m| diag(m))
    }

    /// Magnitudes of the eigenvalues of `a`.
    pub fn eigenvalue_magnitudes(&self) -> Vec<f64> {
        if self.is_decoupled() || self.state_dim() == 1 {
            return self.a.diagonal().iter().map(|v| v.abs()).collect();
        }
        self.a
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect()
    }
}

fn riccati_step(plant: &Plant, s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    // A'S(I + B R^{-1} B' S)^{-1} A + Q: the inversion-lemma form of the
    // recursion, free of the A'SA - A'SB(..)B'SA cancellation for large |A|.
    let (a, b) = (&plant.a, &plant.b);
    let n = a.nrows();
    let r_inv = plant.r_u.clone().try_inverse()?;
    let g = b * r_inv * b.transpose();
    let inner = (DMatrix::identity(n, n) + &g * s).try_inverse()?;
    let next = a.transpose() * s * inner * a + &plant.q;
    // keep exact symmetry
    Some((&next + next.transpose()) * 0.5)
}

/// Solve `S = A'SA - A'SB (R + B'SB)^{-1} B'SA + Q` by fixed-point iteration
/// of the Riccati recursion from `S_0 = Q`.
pub fn dare_solve(plant: &Plant, tol: f64, max_iter: usize) -> Result<DMatrix<f64>, ControlError> {
    let mut s = plant.q.clone();
    let mut change = f64::INFINITY;
    for it in 1..=max_iter {
        let next = riccati_step(plant, &s).ok_or(ControlError::NonConvergent {
            iterations: it,
            change,
        })?;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(ControlError::NonConvergent {
                iterations: it,
                change: f64::INFINITY,
            });
        }
        let denom = next.norm().max(f64::MIN_POSITIVE);
        change = (&next - &s).norm() / denom;
        s = next;
        if change <= tol {
            return Ok(s);
        }
    }
    Err(ControlError::NonConvergent {
        iterations: max_iter,
        change,
    })
}

/// Relative residual `||F(S) - S|| / ||S||` of the Riccati map.
pub fn dare_residual(plant: &Plant, s: &DMatrix<f64>) -> f64 {
    match riccati_step(plant, s) {
        Some(next) => (&next - s).norm() / s.norm().max(f64::MIN_POSITIVE),
        None => f64::INFINITY,
    }
}

/// State-feedback gain `K = (R + B'SB)^{-1} B'SA`, so that `u = -K x`.
pub fn lqr_gain(plant: &Plant, s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let b = &plant.b;
    let gram = &plant.r_u + b.transpose() * s * b;
    Some(gram.try_inverse()? * b.transpose() * s * &plant.a)
}

/// Uncertainty generated by the unstable modes, bits per second.
pub fn intrinsic_entropy_rate(plant: &Plant) -> f64 {
    intrinsic_entropy_bits_per_step(plant) / plant.sample_period_s
}

pub fn intrinsic_entropy_bits_per_step(plant: &Plant) -> f64 {
    plant
        .eigenvalue_magnitudes()
        .into_iter()
        .filter(|&m| m > 1.0)
        .map(f64::log2)
        .sum()
}

/// Whether an information rate suffices to stabilise the plant. A plant with
/// no unstable mode needs no information at all.
pub fn is_stabilizable_at(plant: &Plant, cner_bps: f64) -> bool {
    let h = intrinsic_entropy_rate(plant);
    if h == 0.0 {
        return cner_bps >= 0.0;
    }
    cner_bps > h
}

pub fn cner_bps(effective_bits_per_cycle: f64, cycle_period_s: f64) -> f64 {
    effective_bits_per_cycle / cycle_period_s
}

/// Value of the rate-limited LQR cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateCost {
    Finite(f64),
    /// The rate does not exceed the data-rate-theorem threshold.
    Infeasible,
}

impl RateCost {
    pub fn value(self) -> Option<f64> {
        match self {
            RateCost::Finite(v) => Some(v),
            RateCost::Infeasible => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, RateCost::Finite(_))
    }

    /// Finite value, or `+inf` when infeasible.
    pub fn or_inf(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

/// One decoupled scalar mode of a plant with its cached Riccati quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCost {
    pub a: f64,
    pub w_cov: f64,
    /// Riccati cost-to-go.
    pub s: f64,
    /// LQR gain `a b s / (r + b^2 s)`.
    pub gain: f64,
    /// `s * w_cov`
    pub j_ideal: f64,
    /// `gain^2 (r + b^2 s)`
    pub sensitivity: f64,
}

impl ModeCost {
    fn variance_weight(&self) -> f64 {
        self.sensitivity * self.w_cov
    }

    /// Extra cost above `j_ideal` at `bits` per step, `None` below threshold.
    fn excess(&self, bits: f64) -> Option<f64> {
        let growth = (2.0 * bits * LN_2).exp();
        let margin = growth - self.a * self.a;
        if margin <= 0.0 {
            return None;
        }
        let weight = self.variance_weight();
        Some(if weight == 0.0 { 0.0 } else { weight / margin })
    }

    fn min_bits(&self) -> f64 {
        self.a.abs().log2().max(0.0)
    }

    /// Bits at which the marginal cost reduction equals `lambda`.
    fn bits_at_price(&self, lambda: f64) -> f64 {
        let c = self.variance_weight();
        let a2 = self.a * self.a;
        if c == 0.0 {
            return self.min_bits();
        }
        // lambda (x - a^2)^2 = 2 ln2 c x, larger root, x = 2^{2R}
        let beta = 2.0 * lambda * a2 + 2.0 * LN_2 * c;
        let disc = (beta * beta - 4.0 * lambda * lambda * a2 * a2).max(0.0);
        let x = (beta + disc.sqrt()) / (2.0 * lambda);
        (x.log2() / 2.0).max(0.0)
    }
}

/// Immutable rate-cost model for a plant; Riccati quantities are cached.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCostModel {
    plant: Plant,
    modes: Vec<ModeCost>,
    j_ideal: f64,
    min_bits: f64,
}

impl RateCostModel {
    pub fn new(plant: Plant) -> Result<Self, ControlError> {
        if !plant.is_decoupled() {
            return Err(ControlError::UnsupportedPlant);
        }
        let mut modes = Vec::with_capacity(plant.state_dim());
        for i in 0..plant.state_dim() {
            let mode = Plant::scalar(
                plant.a[(i, i)],
                plant.b[(i, i)],
                plant.w_cov[(i, i)],
                plant.q[(i, i)],
                plant.r_u[(i, i)],
                plant.sample_period_s,
            )?;
            let s = dare_solve(&mode, DEFAULT_DARE_TOL, DEFAULT_DARE_MAX_ITER)?[(0, 0)];
            let (a, b, r) = (plant.a[(i, i)], plant.b[(i, i)], plant.r_u[(i, i)]);
            let gram = r + b * b * s;
            let gain = a * b * s / gram;
            let w = plant.w_cov[(i, i)];
            modes.push(ModeCost {
                a,
                w_cov: w,
                s,
                gain,
                j_ideal: s * w,
                sensitivity: gain * gain * gram,
            });
        }
        let j_ideal = modes.iter().map(|m| m.j_ideal).sum();
        let min_bits = modes.iter().map(ModeCost::min_bits).sum();
        Ok(Self {
            plant,
            modes,
            j_ideal,
            min_bits,
        })
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn modes(&self) -> &[ModeCost] {
        &self.modes
    }

    /// Full-information LQR cost, the limit of [`Self::lqr_cost`] as the rate grows.
    pub fn j_ideal(&self) -> f64 {
        self.j_ideal
    }

    /// Cost-per-variance coefficient of the first mode (the only one for a
    /// scalar plant).
    pub fn sensitivity(&self) -> f64 {
        self.modes[0].sensitivity
    }

    /// Data-rate-theorem threshold in bits per step; feasible rates are
    /// strictly above it.
    pub fn min_bits_per_step(&self) -> f64 {
        self.min_bits
    }

    pub fn lqr_cost(&self, bits_per_step: f64) -> RateCost {
        if bits_per_step.is_nan() || bits_per_step < 0.0 {
            return RateCost::Infeasible;
        }
        if let [mode] = self.modes.as_slice() {
            return match mode.excess(bits_per_step) {
                Some(e) => RateCost::Finite(self.j_ideal + e),
                None => RateCost::Infeasible,
            };
        }
        match self.split_bits(bits_per_step) {
            Some(split) => {
                let mut total = self.j_ideal;
                for (mode, bits) in self.modes.iter().zip(split) {
                    match mode.excess(bits) {
                        Some(e) => total += e,
                        None => return RateCost::Infeasible,
                    }
                }
                RateCost::Finite(total)
            }
            None => RateCost::Infeasible,
        }
    }

    /// Optimal split of a bit budget across decoupled modes (reverse
    /// water-filling on the Lagrange price of one extra bit).
    pub fn split_bits(&self, bits_per_step: f64) -> Option<Vec<f64>> {
        let unstable = self.modes.iter().any(|m| m.a.abs() >= 1.0);
        if bits_per_step < self.min_bits || (unstable && bits_per_step <= self.min_bits) {
            return None;
        }
        let total_at = |lambda: f64| -> f64 { self.modes.iter().map(|m| m.bits_at_price(lambda)).sum() };
        let (mut lo, mut hi) = (-700.0f64, 700.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total_at(mid.exp()) > bits_per_step {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut split: Vec<f64> = self.modes.iter().map(|m| m.bits_at_price(hi.exp())).collect();
        // hand the bisection residue to the first mode still above its floor
        let residue = bits_per_step - split.iter().sum::<f64>();
        if let Some(i) = self.modes.iter().zip(&split).position(|(m, &b)| b > m.min_bits()) {
            split[i] += residue;
        }
        Some(split)
    }
}

/// Free-function form of [`RateCostModel::lqr_cost`].
pub fn lqr_cost(model: &RateCostModel, rate_bits_per_step: f64) -> RateCost {
    model.lqr_cost(rate_bits_per_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(a: f64) -> Plant {
        Plant::scalar(a, 1.0, 1.0, 1.0, 1.0, 0.02).unwrap()
    }

    #[test]
    fn dare_scalar_hand_solutions() {
        let s0 = dare_solve(&scalar(0.0), 1e-12, 10_000).unwrap()[(0, 0)];
        assert_eq!(s0, 1.0);
        let s1 = dare_solve(&scalar(1.0), 1e-12, 10_000).unwrap()[(0, 0)];
        assert!((s1 - (1.0 + 5f64.sqrt()) / 2.0).abs() / s1 < 1e-9);
        let s2 = dare_solve(&scalar(2.0), 1e-12, 10_000).unwrap()[(0, 0)];
        assert!((s2 - (2.0 + 5f64.sqrt())).abs() / s2 < 1e-9);
    }

    #[test]
    fn dare_reports_non_convergence() {
        // b = 0 with |a| > 1 is not stabilisable
        let p = Plant::scalar(2.0, 0.0, 1.0, 1.0, 1.0, 0.02).unwrap();
        assert!(matches!(
            dare_solve(&p, 1e-12, 10_000),
            Err(ControlError::NonConvergent { .. })
        ));
        assert!(matches!(
            RateCostModel::new(p),
            Err(ControlError::NonConvergent { .. })
        ));
    }

    #[test]
    fn dare_matrix_plant_residual() {
        let a = DMatrix::from_row_slice(2, 2, &[1.1, 0.3, 0.0, 0.9]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let p = Plant::new(
            a,
            b,
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(1, 1),
            0.02,
        )
        .unwrap();
        let s = dare_solve(&p, 1e-12, 10_000).unwrap();
        assert!(dare_residual(&p, &s) <= 1e-11);
        assert!((&s - s.transpose()).norm() == 0.0);
        assert!(s.clone().symmetric_eigenvalues().min() >= 0.0);
        assert!(lqr_gain(&p, &s).is_some());
        assert_eq!(RateCostModel::new(p), Err(ControlError::UnsupportedPlant));
    }

    #[test]
    fn plant_validation() {
        assert!(matches!(
            Plant::scalar(1.0, 1.0, -1.0, 1.0, 1.0, 0.02),
            Err(ControlError::NotPsd("w_cov"))
        ));
        assert_eq!(
            Plant::scalar(1.0, 1.0, 1.0, 1.0, 0.0, 0.02),
            Err(ControlError::NotPd)
        );
        assert!(matches!(
            Plant::scalar(1.0, 1.0, 1.0, 1.0, 1.0, 0.0),
            Err(ControlError::SamplePeriod(_))
        ));
        assert!(matches!(
            Plant::scalar(f64::NAN, 1.0, 1.0, 1.0, 1.0, 0.02),
            Err(ControlError::NonFinite("a"))
        ));
        assert!(Plant::diagonal(&[1.0, 2.0], &[1.0], &[1.0], &[1.0], &[1.0], 1.0).is_err());
    }

    #[test]
    fn entropy_rate_examples() {
        assert_eq!(
            intrinsic_entropy_rate(&Plant::scalar(0.5, 1.0, 1.0, 1.0, 1.0, 3.0).unwrap()),
            0.0
        );
        assert!((intrinsic_entropy_rate(&scalar(2.0)) - 50.0).abs() < 1e-12);
        let diag = Plant::diagonal(
            &[2.0, 4.0],
            &[1.0, 1.0],
            &[1.0, 1.0],
            &[1.0, 1.0],
            &[1.0, 1.0],
            1.0,
        )
        .unwrap();
        assert!((intrinsic_entropy_rate(&diag) - 3.0).abs() < 1e-12);
        // coupled: triangular, eigenvalues on the diagonal
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 5.0, 0.0, 0.5]);
        let coupled = Plant::new(
            a,
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            1.0,
        )
        .unwrap();
        assert!((intrinsic_entropy_rate(&coupled) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stabilizability_examples() {
        assert!(is_stabilizable_at(
            &Plant::scalar(0.9, 1.0, 1.0, 1.0, 1.0, 0.02).unwrap(),
            0.0
        ));
        assert!(!is_stabilizable_at(&scalar(2.0), 50.0));
        assert!(is_stabilizable_at(&scalar(2.0), 51.0));
    }

    #[test]
    fn cner_examples() {
        assert!((cner_bps(1.0, 0.02) - 50.0).abs() < 1e-12);
        assert_eq!(cner_bps(0.0, 0.7), 0.0);
        assert!((cner_bps(1000.0, 0.02) - 50_000.0).abs() < 1e-9);
    }

    #[test]
    fn lqr_cost_examples() {
        let m = RateCostModel::new(scalar(2.0)).unwrap();
        let s = 2.0 + 5f64.sqrt();
        assert!((m.j_ideal() - s).abs() < 1e-12);
        assert_eq!(m.lqr_cost(1.0), RateCost::Infeasible);
        assert_eq!(m.lqr_cost(0.5), RateCost::Infeasible);
        // hand evaluation: k = 2s/(1+s), sens = k^2 (1+s), P = 1/(16-4)
        let k = 2.0 * s / (1.0 + s);
        let expected = s + k * k * (1.0 + s) / 12.0;
        let j2 = m.lqr_cost(2.0).value().unwrap();
        assert!((j2 - expected).abs() < 1e-12, "{j2} vs {expected}");
        assert_eq!(m.lqr_cost(1e6).value().unwrap(), m.j_ideal());
        assert_eq!(m.min_bits_per_step(), 1.0);
    }

    #[test]
    fn stable_plant_is_finite_at_zero_rate() {
        let m = RateCostModel::new(Plant::scalar(0.9, 1.0, 1.0, 1.0, 1.0, 0.02).unwrap()).unwrap();
        let j0 = m.lqr_cost(0.0).value().unwrap();
        let expected = m.j_ideal() + m.sensitivity() / (1.0 - 0.81);
        assert!((j0 - expected).abs() < 1e-12);
    }

    #[test]
    fn lqr_cost_monotone_convex_and_asymptotic() {
        for a in [0.5, 1.0, 1.5, 2.0, 3.0, 4.0] {
            let m = RateCostModel::new(scalar(a)).unwrap();
            let start = m.min_bits_per_step() + 0.05;
            let grid: Vec<f64> = (0..400).map(|i| start + i as f64 * 0.05).collect();
            let j: Vec<f64> = grid.iter().map(|&r| m.lqr_cost(r).value().unwrap()).collect();
            for w in j.windows(2) {
                assert!(w[1] < w[0] || (w[0] - m.j_ideal()).abs() < 1e-12 * m.j_ideal());
            }
            for w in j.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12);
            }
            assert!(j.iter().all(|&v| v >= m.j_ideal()));
            let far = m.lqr_cost(64.0).value().unwrap();
            assert!((far - m.j_ideal()).abs() < 1e-6 * m.j_ideal());
        }
    }

    #[test]
    fn diagonal_plant_split() {
        let p = Plant::diagonal(
            &[2.0, 4.0],
            &[1.0, 1.0],
            &[1.0, 1.0],
            &[1.0, 1.0],
            &[1.0, 1.0],
            1.0,
        )
        .unwrap();
        let m = RateCostModel::new(p).unwrap();
        assert_eq!(m.min_bits_per_step(), 3.0);
        assert_eq!(m.lqr_cost(3.0), RateCost::Infeasible);
        let split = m.split_bits(6.0).unwrap();
        assert!((split.iter().sum::<f64>() - 6.0).abs() < 1e-9);
        assert!(split[0] > 1.0 && split[1] > 2.0);
        // optimality: no perturbation of the split does better
        let cost = |s: &[f64]| -> f64 {
            m.modes()
                .iter()
                .zip(s)
                .map(|(md, &b)| md.excess(b).unwrap_or(f64::INFINITY))
                .sum()
        };
        let best = cost(&split);
        for d in [-0.01, 0.01] {
            let alt = [split[0] + d, split[1] - d];
            assert!(cost(&alt) >= best - 1e-12);
        }
        assert!((m.lqr_cost(6.0).value().unwrap() - (m.j_ideal() + best)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn stabilizable_monotone_in_cner(a in 0.1f64..8.0, r in 0.0f64..500.0, dr in 0.0f64..100.0) {
            let p = scalar(a);
            if is_stabilizable_at(&p, r) {
                prop_assert!(is_stabilizable_at(&p, r + dr));
            }
        }

        #[test]
        fn dare_residual_small(a in -3.0f64..3.0, b in 0.2f64..3.0, q in 0.0f64..5.0, r in 0.1f64..5.0) {
            let p = Plant::scalar(a, b, 1.0, q, r, 0.02).unwrap();
            let s = dare_solve(&p, 1e-12, 10_000).unwrap();
            prop_assert!(dare_residual(&p, &s) <= 1e-11);
        }
    }
}
