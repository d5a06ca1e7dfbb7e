#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use wiggle_core::builder::load_map;
use wiggle_core::{KernelConfig, PiecewiseMonotoneMap, WiggleSpec};

/// Working constants measured over the reference specs.
pub const NU0: f64 = 7.1372;
pub const GROWTH_C: f64 = 3.3496;

/// Wiggle placed by the first builder stage on (39, 73, 107, 141).
pub const STAGED: (f64, f64) = (61.6128, 118.3872);

fn cached(cell: &'static OnceLock<Arc<PiecewiseMonotoneMap>>, spec: fn() -> WiggleSpec) -> Arc<PiecewiseMonotoneMap> {
    cell.get_or_init(|| Arc::new(load_map(&spec(), &KernelConfig::default()).expect("kernel builds")))
        .clone()
}

pub fn straight() -> Arc<PiecewiseMonotoneMap> {
    static C: OnceLock<Arc<PiecewiseMonotoneMap>> = OnceLock::new();
    cached(&C, WiggleSpec::straight)
}

pub fn one_wiggle() -> Arc<PiecewiseMonotoneMap> {
    static C: OnceLock<Arc<PiecewiseMonotoneMap>> = OnceLock::new();
    cached(&C, || WiggleSpec::new(vec![20.0], vec![30.0]))
}

pub fn two_wiggles() -> Arc<PiecewiseMonotoneMap> {
    static C: OnceLock<Arc<PiecewiseMonotoneMap>> = OnceLock::new();
    cached(&C, || WiggleSpec::new(vec![10.0, 20.0], vec![13.0, 30.0]))
}

pub fn staged() -> Arc<PiecewiseMonotoneMap> {
    static C: OnceLock<Arc<PiecewiseMonotoneMap>> = OnceLock::new();
    cached(&C, || WiggleSpec::new(vec![STAGED.0], vec![STAGED.1]))
}

pub fn phi0(t: f64) -> f64 {
    4.0 + 2.0 * (t * 0.5f64.sinh() / 5.0).asinh()
}

pub fn phi0_inv(x: f64) -> f64 {
    5.0 * ((x - 4.0) / 2.0).sinh() / 0.5f64.sinh()
}
