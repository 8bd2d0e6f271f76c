//! Helpers shared by the integration tests.
#![allow(dead_code)]

pub mod quantized;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sc3_core::optimize::{Decision, MultiLoopProblem, SingleLoopProblem};
use sc3_core::scenario::{load_scenario, Scenario};

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
    }
}

/// Reproducible single-loop scenarios spanning weak to strong links.
pub fn random_single_loop(seed: u64) -> SingleLoopProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doc = format!(
        "[plant]\na = {:?}\n[uplink]\ntx_power_w = {:?}\n[downlink]\ntx_power_w = {:?}\n\
         [single_loop]\ntotal_bandwidth_khz = {:?}\nelevation_deg = {:?}\npayload_bits = {:?}\n",
        rng.gen_range(1.2..4.0),
        rng.gen_range(0.1..1.0),
        rng.gen_range(5.0..40.0),
        rng.gen_range(8.0..200.0),
        rng.gen_range(30.0..90.0),
        rng.gen_range(1e3..1e5),
    );
    load_scenario(&doc).unwrap().single_loop_problem().unwrap()
}

/// Reproducible two-robot scenarios with unequal channels and plants.
pub fn random_two_robot(seed: u64) -> MultiLoopProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doc = format!(
        "seed = {seed}\n[budget]\ncompute_gcps = {:?}\n[multi_loop]\nrobots = 2\nelevations_deg = [{:?}, {:?}]\n\
         total_power_w = {:?}\nplants = [{{ a = {:?} }}, {{ a = {:?} }}]\n",
        rng.gen_range(2.0..20.0),
        rng.gen_range(60.0..90.0),
        rng.gen_range(30.0..60.0),
        rng.gen_range(1.0..40.0),
        rng.gen_range(1.5..3.0),
        rng.gen_range(1.5..3.0),
    );
    load_scenario(&doc).unwrap().multi_loop_problem().unwrap()
}

pub fn paper_default() -> Scenario {
    Scenario::default()
}

pub fn powers(d: &Decision) -> &[f64] {
    match d {
        Decision::PowerCompute { powers_w, .. } => powers_w,
        Decision::Bandwidth { .. } => panic!("expected a power/compute decision"),
    }
}

pub fn compute(d: &Decision) -> &[f64] {
    match d {
        Decision::PowerCompute { compute_cps, .. } => compute_cps,
        Decision::Bandwidth { .. } => panic!("expected a power/compute decision"),
    }
}
