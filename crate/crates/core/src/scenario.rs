//! Declarative scenario documents.
//!
//! A scenario is a TOML document whose keys carry their unit in the name
//! (`carrier_freq_ghz`, `cycle_period_ms`, ...). Every key is optional and
//! falls back to [`PaperDefaults`]. Values are kept in document units so a
//! normalized dump reloads to an identical [`Scenario`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{Plant, RateCostModel};
use crate::linkgeom::{Geometry, LinkParams};
use crate::optimize::{
    MultiLoopProblem, MultiScheme, RobotLoop, SingleLoopProblem, SingleObjective, SolverOptions,
};
use crate::pipeline::LoopBudget;

/// Upper bounds that keep a hostile document from allocating without limit.
pub const MAX_ROBOTS: usize = 64;
pub const MAX_GRID_POINTS: usize = 1000;
pub const MAX_RESTARTS: usize = 1000;
pub const MAX_PLANT_MODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown key(s): {}", .0.join(", "))]
    UnknownKey(Vec<String>),
    #[error("validation error: {0}")]
    Validation(String),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(msg.into())
}

/// Reference parameter set. Values without a published source are listed in
/// [`PaperDefaults::ASSUMED`] and flagged in every output header.
pub struct PaperDefaults;

impl PaperDefaults {
    pub const ALTITUDE_KM: f64 = 600.0;
    pub const CARRIER_FREQ_GHZ: f64 = 30.0;
    pub const SATELLITE_GAIN_DBI: f64 = 38.5;
    pub const TERMINAL_GAIN_DBI: f64 = 14.0;
    pub const UPLINK_POWER_W: f64 = 0.2;
    pub const DOWNLINK_POWER_W: f64 = 20.0;
    pub const COMPUTE_GCPS: f64 = 10.0;
    pub const CYCLES_PER_BIT: f64 = 100.0;
    pub const EXTRACTION_RATIO: f64 = 0.001;
    pub const CYCLE_PERIOD_MS: f64 = 20.0;
    pub const ROBOTS: usize = 5;
    pub const ELEVATION_MIN_DEG: f64 = 30.0;
    pub const ELEVATION_MAX_DEG: f64 = 90.0;

    pub const EARTH_RADIUS_KM: f64 = 6371.0;
    pub const NOISE_TEMPERATURE_K: f64 = 290.0;
    pub const SINGLE_BANDWIDTH_KHZ: f64 = 20.0;
    pub const SINGLE_ELEVATION_DEG: f64 = 90.0;
    pub const PAYLOAD_BITS: f64 = 1e4;
    pub const PLANT_A: f64 = 2.0;
    pub const PLANT_B: f64 = 1.0;
    pub const PLANT_W_COV: f64 = 1.0;
    pub const PLANT_Q: f64 = 1.0;
    pub const PLANT_R_U: f64 = 1.0;
    pub const UPLINK_SHARE_MHZ: f64 = 2.0;
    pub const DOWNLINK_SHARE_HZ: f64 = 20.0;
    pub const UPLINK_BITS: f64 = 2e4;
    pub const DESIGNATED_POWER_W: f64 = 20.0;
    pub const POWER_SWEEP_W: (f64, f64, usize) = (1.0, 40.0, 20);
    pub const COMPUTE_GRID_GCPS: (f64, f64, usize) = (2.0, 20.0, 20);
    pub const RESTARTS: usize = 10;
    pub const SEED: u64 = 1;

    /// Document keys whose default is a decision, not a published value.
    pub const ASSUMED: &'static [&'static str] = &[
        "seed",
        "orbit.earth_radius_km",
        "uplink.noise_temperature_k",
        "downlink.noise_temperature_k",
        "budget.include_propagation",
        "plant.a",
        "plant.b",
        "plant.w_cov",
        "plant.q",
        "plant.r_u",
        "single_loop.total_bandwidth_khz",
        "single_loop.elevation_deg",
        "single_loop.payload_bits",
        "multi_loop.uplink_bandwidth_mhz",
        "multi_loop.downlink_bandwidth_hz",
        "multi_loop.uplink_bits",
        "multi_loop.total_power_w",
        "multi_loop.restarts",
        "sweeps.power_min_w",
        "sweeps.power_max_w",
        "sweeps.power_points",
        "sweeps.compute_min_gcps",
        "sweeps.compute_max_gcps",
        "sweeps.compute_points",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrbitSpec {
    pub altitude_km: f64,
    pub earth_radius_km: f64,
}

impl Default for OrbitSpec {
    fn default() -> Self {
        Self {
            altitude_km: PaperDefaults::ALTITUDE_KM,
            earth_radius_km: PaperDefaults::EARTH_RADIUS_KM,
        }
    }
}

macro_rules! link_section {
    ($name:ident, $power:expr, $tx_gain:expr, $rx_gain:expr) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(default)]
        pub struct $name {
            pub tx_power_w: f64,
            pub tx_gain_dbi: f64,
            pub rx_gain_dbi: f64,
            pub carrier_freq_ghz: f64,
            pub noise_temperature_k: f64,
        }

        impl Default for $name {
            fn default() -> Self {
                Self {
                    tx_power_w: $power,
                    tx_gain_dbi: $tx_gain,
                    rx_gain_dbi: $rx_gain,
                    carrier_freq_ghz: PaperDefaults::CARRIER_FREQ_GHZ,
                    noise_temperature_k: PaperDefaults::NOISE_TEMPERATURE_K,
                }
            }
        }

        impl $name {
            fn validate(&self, section: &str) -> Result<(), ScenarioError> {
                positive(&format!("{section}.tx_power_w"), self.tx_power_w)?;
                finite(&format!("{section}.tx_gain_dbi"), self.tx_gain_dbi)?;
                finite(&format!("{section}.rx_gain_dbi"), self.rx_gain_dbi)?;
                positive(
                    &format!("{section}.carrier_freq_ghz"),
                    self.carrier_freq_ghz,
                )?;
                positive(
                    &format!("{section}.noise_temperature_k"),
                    self.noise_temperature_k,
                )
            }

            fn params(&self, geometry: Geometry, bandwidth_hz: f64) -> LinkParams {
                LinkParams {
                    tx_power_w: self.tx_power_w,
                    tx_gain_dbi: self.tx_gain_dbi,
                    rx_gain_dbi: self.rx_gain_dbi,
                    carrier_freq_hz: self.carrier_freq_ghz * 1e9,
                    bandwidth_hz,
                    noise_temperature_k: self.noise_temperature_k,
                    geometry,
                }
            }
        }
    };
}

link_section!(
    UplinkSpec,
    PaperDefaults::UPLINK_POWER_W,
    PaperDefaults::TERMINAL_GAIN_DBI,
    PaperDefaults::SATELLITE_GAIN_DBI
);
link_section!(
    DownlinkSpec,
    PaperDefaults::DOWNLINK_POWER_W,
    PaperDefaults::SATELLITE_GAIN_DBI,
    PaperDefaults::TERMINAL_GAIN_DBI
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetSpec {
    pub cycle_period_ms: f64,
    pub cycles_per_bit: f64,
    pub compute_gcps: f64,
    pub extraction_ratio: f64,
    pub include_propagation: bool,
}

impl Default for BudgetSpec {
    fn default() -> Self {
        Self {
            cycle_period_ms: PaperDefaults::CYCLE_PERIOD_MS,
            cycles_per_bit: PaperDefaults::CYCLES_PER_BIT,
            compute_gcps: PaperDefaults::COMPUTE_GCPS,
            extraction_ratio: PaperDefaults::EXTRACTION_RATIO,
            include_propagation: true,
        }
    }
}

impl BudgetSpec {
    pub fn loop_budget(&self) -> LoopBudget {
        LoopBudget {
            cycle_period_s: self.cycle_period_ms * 1e-3,
            cycles_per_bit: self.cycles_per_bit,
            compute_rate_cps: self.compute_gcps * 1e9,
            extraction_ratio: self.extraction_ratio,
            include_propagation: self.include_propagation,
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        positive("budget.cycle_period_ms", self.cycle_period_ms)?;
        positive("budget.cycles_per_bit", self.cycles_per_bit)?;
        positive("budget.compute_gcps", self.compute_gcps)?;
        positive("budget.extraction_ratio", self.extraction_ratio)?;
        if self.extraction_ratio > 1.0 {
            return Err(invalid("budget.extraction_ratio must not exceed 1"));
        }
        Ok(())
    }
}

/// A plant coefficient: one number for a scalar plant, or one entry per
/// decoupled mode. A single number broadcasts across modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Modes {
    Scalar(f64),
    PerMode(Vec<f64>),
}

impl Modes {
    fn len(&self) -> Option<usize> {
        match self {
            Modes::Scalar(_) => None,
            Modes::PerMode(v) => Some(v.len()),
        }
    }

    fn expand(&self, n: usize) -> Vec<f64> {
        match self {
            Modes::Scalar(x) => vec![*x; n],
            Modes::PerMode(v) => v.clone(),
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Modes::Scalar(x) => std::slice::from_ref(x),
            Modes::PerMode(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantSpec {
    pub a: Modes,
    pub b: Modes,
    pub w_cov: Modes,
    pub q: Modes,
    pub r_u: Modes,
}

impl Default for PlantSpec {
    fn default() -> Self {
        Self {
            a: Modes::Scalar(PaperDefaults::PLANT_A),
            b: Modes::Scalar(PaperDefaults::PLANT_B),
            w_cov: Modes::Scalar(PaperDefaults::PLANT_W_COV),
            q: Modes::Scalar(PaperDefaults::PLANT_Q),
            r_u: Modes::Scalar(PaperDefaults::PLANT_R_U),
        }
    }
}

impl PlantSpec {
    fn fields(&self) -> [(&'static str, &Modes); 5] {
        [
            ("a", &self.a),
            ("b", &self.b),
            ("w_cov", &self.w_cov),
            ("q", &self.q),
            ("r_u", &self.r_u),
        ]
    }

    pub fn plant(&self, sample_period_s: f64, label: &str) -> Result<Plant, ScenarioError> {
        let mut dim = None;
        for (key, m) in self.fields() {
            if m.values().iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("{label}.{key} must be finite")));
            }
            match (dim, m.len()) {
                (_, Some(0)) => return Err(invalid(format!("{label}.{key} must not be empty"))),
                (_, Some(n)) if n > MAX_PLANT_MODES => {
                    return Err(invalid(format!("{label}.{key}: at most {MAX_PLANT_MODES} modes")))
                }
                (Some(d), Some(n)) if d != n => {
                    return Err(invalid(format!("{label}: mode lists must have equal length")))
                }
                (None, Some(n)) => dim = Some(n),
                _ => {}
            }
        }
        let n = dim.unwrap_or(1);
        let plant = if dim.is_none() {
            let s = |m: &Modes| m.values()[0];
            Plant::scalar(
                s(&self.a),
                s(&self.b),
                s(&self.w_cov),
                s(&self.q),
                s(&self.r_u),
                sample_period_s,
            )
        } else {
            Plant::diagonal(
                &self.a.expand(n),
                &self.b.expand(n),
                &self.w_cov.expand(n),
                &self.q.expand(n),
                &self.r_u.expand(n),
                sample_period_s,
            )
        };
        plant.map_err(|e| invalid(format!("{label}: {e}")))
    }

    fn apply(&self, o: &PlantOverride) -> PlantSpec {
        let pick = |ov: &Option<Modes>, base: &Modes| ov.clone().unwrap_or_else(|| base.clone());
        PlantSpec {
            a: pick(&o.a, &self.a),
            b: pick(&o.b, &self.b),
            w_cov: pick(&o.w_cov, &self.w_cov),
            q: pick(&o.q, &self.q),
            r_u: pick(&o.r_u, &self.r_u),
        }
    }
}

/// Per-robot plant; unset coefficients come from the top-level `[plant]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Modes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Modes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_cov: Option<Modes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Modes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_u: Option<Modes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SingleLoopSpec {
    pub total_bandwidth_khz: f64,
    pub elevation_deg: f64,
    pub payload_bits: f64,
}

impl Default for SingleLoopSpec {
    fn default() -> Self {
        Self {
            total_bandwidth_khz: PaperDefaults::SINGLE_BANDWIDTH_KHZ,
            elevation_deg: PaperDefaults::SINGLE_ELEVATION_DEG,
            payload_bits: PaperDefaults::PAYLOAD_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiLoopSpec {
    pub robots: usize,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    /// Explicit elevations, robot 1 first. Sampled from the seed when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elevations_deg: Option<Vec<f64>>,
    pub uplink_bandwidth_mhz: f64,
    pub downlink_bandwidth_hz: f64,
    pub uplink_bits: f64,
    pub total_power_w: f64,
    pub restarts: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub plants: Vec<PlantOverride>,
}

impl Default for MultiLoopSpec {
    fn default() -> Self {
        Self {
            robots: PaperDefaults::ROBOTS,
            elevation_min_deg: PaperDefaults::ELEVATION_MIN_DEG,
            elevation_max_deg: PaperDefaults::ELEVATION_MAX_DEG,
            elevations_deg: None,
            uplink_bandwidth_mhz: PaperDefaults::UPLINK_SHARE_MHZ,
            downlink_bandwidth_hz: PaperDefaults::DOWNLINK_SHARE_HZ,
            uplink_bits: PaperDefaults::UPLINK_BITS,
            total_power_w: PaperDefaults::DESIGNATED_POWER_W,
            restarts: PaperDefaults::RESTARTS,
            plants: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub power_min_w: f64,
    pub power_max_w: f64,
    pub power_points: usize,
    pub compute_min_gcps: f64,
    pub compute_max_gcps: f64,
    pub compute_points: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let (p0, p1, np) = PaperDefaults::POWER_SWEEP_W;
        let (c0, c1, nc) = PaperDefaults::COMPUTE_GRID_GCPS;
        Self {
            power_min_w: p0,
            power_max_w: p1,
            power_points: np,
            compute_min_gcps: c0,
            compute_max_gcps: c1,
            compute_points: nc,
        }
    }
}

impl SweepSpec {
    pub fn power_grid_w(&self) -> Vec<f64> {
        grid(self.power_min_w, self.power_max_w, self.power_points)
    }

    pub fn compute_grid_cps(&self) -> Vec<f64> {
        grid(self.compute_min_gcps, self.compute_max_gcps, self.compute_points)
            .into_iter()
            .map(|g| g * 1e9)
            .collect()
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        for (name, lo, hi, n) in [
            ("power", self.power_min_w, self.power_max_w, self.power_points),
            (
                "compute",
                self.compute_min_gcps,
                self.compute_max_gcps,
                self.compute_points,
            ),
        ] {
            positive(&format!("sweeps.{name}_min"), lo)?;
            positive(&format!("sweeps.{name}_max"), hi)?;
            if n == 0 || n > MAX_GRID_POINTS {
                return Err(invalid(format!(
                    "sweeps.{name}_points must be in 1..={MAX_GRID_POINTS}"
                )));
            }
            if n > 1 && hi <= lo {
                return Err(invalid(format!("sweeps.{name}_max must exceed {name}_min")));
            }
            if n == 1 && hi != lo {
                return Err(invalid(format!(
                    "sweeps: a one-point {name} grid needs min == max"
                )));
            }
        }
        Ok(())
    }
}

/// Evenly spaced points from `lo` to `hi` inclusive.
fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub orbit: OrbitSpec,
    pub uplink: UplinkSpec,
    pub downlink: DownlinkSpec,
    pub budget: BudgetSpec,
    pub plant: PlantSpec,
    pub single_loop: SingleLoopSpec,
    pub multi_loop: MultiLoopSpec,
    pub sweeps: SweepSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".into(),
            seed: PaperDefaults::SEED,
            orbit: OrbitSpec::default(),
            uplink: UplinkSpec::default(),
            downlink: DownlinkSpec::default(),
            budget: BudgetSpec::default(),
            plant: PlantSpec::default(),
            single_loop: SingleLoopSpec::default(),
            multi_loop: MultiLoopSpec::default(),
            sweeps: SweepSpec::default(),
        }
    }
}

/// Parse, default-merge and validate a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let mut unknown = Vec::new();
    let scenario: Scenario = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| ScenarioError::Parse(e.to_string()))?;
    if !unknown.is_empty() {
        return Err(ScenarioError::UnknownKey(unknown));
    }
    scenario.validate()?;
    Ok(scenario)
}

/// `n` elevations drawn uniformly from `[min_deg, max_deg]`, best first.
pub fn sample_elevations(n: usize, min_deg: f64, max_deg: f64, seed: u64) -> Result<Vec<f64>, ScenarioError> {
    if n == 0 {
        return Err(invalid("at least one elevation is required"));
    }
    if !(min_deg > 0.0 && min_deg <= max_deg && max_deg <= 90.0) {
        return Err(invalid(format!(
            "elevation range [{min_deg}, {max_deg}] must satisfy 0 < min <= max <= 90"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<f64> = (0..n).map(|_| rng.gen_range(min_deg..=max_deg)).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

fn finite(name: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite")))
    }
}

fn positive(name: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn elevation(name: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 && v <= 90.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in (0, 90], got {v}")))
    }
}

impl Scenario {
    pub fn dump(&self) -> String {
        toml::to_string(self).expect("validated scenarios serialize")
    }

    pub fn with_seed(mut self, seed: u64) -> Result<Self, ScenarioError> {
        self.seed = seed;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        // TOML integers are signed; keep the dump loadable.
        if self.seed > i64::MAX as u64 {
            return Err(invalid("seed must fit in a signed 64-bit integer"));
        }
        positive("orbit.altitude_km", self.orbit.altitude_km)?;
        positive("orbit.earth_radius_km", self.orbit.earth_radius_km)?;
        self.uplink.validate("uplink")?;
        self.downlink.validate("downlink")?;
        self.budget.validate()?;

        let s = &self.single_loop;
        positive("single_loop.total_bandwidth_khz", s.total_bandwidth_khz)?;
        elevation("single_loop.elevation_deg", s.elevation_deg)?;
        positive("single_loop.payload_bits", s.payload_bits)?;

        let m = &self.multi_loop;
        if m.robots == 0 || m.robots > MAX_ROBOTS {
            return Err(invalid(format!("multi_loop.robots must be in 1..={MAX_ROBOTS}")));
        }
        elevation("multi_loop.elevation_min_deg", m.elevation_min_deg)?;
        elevation("multi_loop.elevation_max_deg", m.elevation_max_deg)?;
        if m.elevation_min_deg > m.elevation_max_deg {
            return Err(invalid("multi_loop.elevation_min_deg exceeds elevation_max_deg"));
        }
        if let Some(e) = &m.elevations_deg {
            if e.len() != m.robots {
                return Err(invalid("multi_loop.elevations_deg must list one angle per robot"));
            }
            for &v in e {
                elevation("multi_loop.elevations_deg", v)?;
            }
        }
        positive("multi_loop.uplink_bandwidth_mhz", m.uplink_bandwidth_mhz)?;
        positive("multi_loop.downlink_bandwidth_hz", m.downlink_bandwidth_hz)?;
        positive("multi_loop.uplink_bits", m.uplink_bits)?;
        positive("multi_loop.total_power_w", m.total_power_w)?;
        if m.restarts == 0 || m.restarts > MAX_RESTARTS {
            return Err(invalid(format!(
                "multi_loop.restarts must be in 1..={MAX_RESTARTS}"
            )));
        }
        if !m.plants.is_empty() && m.plants.len() != m.robots {
            return Err(invalid("multi_loop.plants must have one entry per robot"));
        }
        self.sweeps.validate()?;

        // Physical checks that live in the model constructors.
        self.single_loop_problem()?;
        self.multi_loop_problem()?;
        Ok(())
    }

    fn geometry(&self, elevation_deg: f64) -> Result<Geometry, ScenarioError> {
        Geometry::with_earth_radius(
            self.orbit.altitude_km * 1e3,
            elevation_deg,
            self.orbit.earth_radius_km * 1e3,
        )
        .map_err(|e| invalid(e.to_string()))
    }

    fn rate_cost_model(&self, spec: &PlantSpec, label: &str) -> Result<RateCostModel, ScenarioError> {
        let plant = spec.plant(self.budget.cycle_period_ms * 1e-3, label)?;
        RateCostModel::new(plant).map_err(|e| invalid(format!("{label}: {e}")))
    }

    pub fn single_loop_problem(&self) -> Result<SingleLoopProblem, ScenarioError> {
        let s = &self.single_loop;
        let g = self.geometry(s.elevation_deg)?;
        // Bandwidth is overwritten by the decision; any positive placeholder works.
        SingleLoopProblem::new(
            s.total_bandwidth_khz * 1e3,
            self.uplink.params(g, 1.0),
            self.downlink.params(g, 1.0),
            self.budget.loop_budget(),
            self.rate_cost_model(&self.plant, "plant")?,
            SingleObjective::TaskOriented,
            s.payload_bits,
        )
        .map_err(|e| invalid(e.to_string()))
    }

    /// Robot elevations, robot 1 first (best channel).
    pub fn robot_elevations(&self) -> Result<Vec<f64>, ScenarioError> {
        let m = &self.multi_loop;
        match &m.elevations_deg {
            Some(e) => Ok(e.clone()),
            None => sample_elevations(m.robots, m.elevation_min_deg, m.elevation_max_deg, self.seed),
        }
    }

    pub fn multi_loop_problem(&self) -> Result<MultiLoopProblem, ScenarioError> {
        let m = &self.multi_loop;
        let mut robots = Vec::with_capacity(m.robots);
        for (i, e) in self.robot_elevations()?.into_iter().enumerate() {
            let g = self.geometry(e)?;
            let model = match m.plants.get(i) {
                Some(o) => self.rate_cost_model(&self.plant.apply(o), &format!("multi_loop.plants[{i}]"))?,
                None => self.rate_cost_model(&self.plant, "plant")?,
            };
            robots.push(RobotLoop {
                uplink: self.uplink.params(g, m.uplink_bandwidth_mhz * 1e6),
                downlink: self.downlink.params(g, m.downlink_bandwidth_hz),
                model,
                uplink_bits: m.uplink_bits,
            });
        }
        let options = SolverOptions {
            restarts: m.restarts,
            seed: self.seed,
            ..SolverOptions::default()
        };
        MultiLoopProblem::new(
            robots,
            m.total_power_w,
            self.budget.compute_gcps * 1e9,
            self.budget.loop_budget(),
            MultiScheme::TaskOrientedJoint,
            options,
        )
        .map_err(|e| invalid(e.to_string()))
    }

    /// `(key, value)` for every assumed default still at its default value.
    pub fn assumed_defaults_in_use(&self) -> Vec<(String, String)> {
        let here = toml::Value::try_from(self).expect("scenario serializes");
        let base = toml::Value::try_from(Scenario::default()).expect("defaults serialize");
        let lookup =
            |v: &toml::Value, key: &str| key.split('.').try_fold(v.clone(), |acc, k| acc.get(k).cloned());
        PaperDefaults::ASSUMED
            .iter()
            .filter_map(|key| {
                let v = lookup(&here, key)?;
                (Some(&v) == lookup(&base, key).as_ref()).then(|| (key.to_string(), v.to_string()))
            })
            .collect()
    }
}
