#![allow(dead_code)]

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use spopo_core::kernel::{CrystalConfig, Dispersion, FrequencyGrid, JointKernel, PumpConfig};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// 2 mm BBO-like crystal, 800 nm signal, degenerate phase matching.
pub fn bbo_crystal() -> CrystalConfig {
    CrystalConfig {
        length: 2e-3,
        d_eff: 2e-12,
        n0: 1.66,
        a_eff: 1.26e-9,
        signal_dispersion: Dispersion([1.3e7, 5.60e-9, 3.75e-26, 0.0]),
        pump_dispersion: Dispersion([2.6e7, 5.79e-9, 9.75e-26, 0.0]),
        omega0: 2.355e15,
    }
}

pub fn pump(delta0: f64) -> PumpConfig {
    PumpConfig::gaussian(1e-9, 100e-15, delta0, 13.2e-9).unwrap()
}

pub fn default_grid(n: usize) -> FrequencyGrid {
    FrequencyGrid::new(n, 6e13).unwrap()
}

/// `exp(−A(ω+ω′)² − B(ω−ω′)²)` sampled with the quadrature weight.
pub fn double_gaussian(grid: FrequencyGrid, a: f64, b: f64) -> JointKernel {
    JointKernel::from_fn(grid, |w, wp| Complex64::new((-a * (w + wp).powi(2) - b * (w - wp).powi(2)).exp(), 0.0))
}

/// Schmidt ratio of the double Gaussian.
pub fn double_gaussian_ratio(a: f64, b: f64) -> f64 {
    (a.sqrt() - b.sqrt()).abs() / (a.sqrt() + b.sqrt())
}

/// Leading gain of the double Gaussian from its trace `∫ e^{−4Aω²} dω/2π`.
/// Eigenvalues are `λ0 (±μ)ⁿ`, alternating in sign when `A > B`.
pub fn double_gaussian_leading(a: f64, b: f64) -> f64 {
    let trace = (std::f64::consts::PI / (4.0 * a)).sqrt() / (2.0 * std::f64::consts::PI);
    let mu = double_gaussian_ratio(a, b);
    if a > b {
        trace * (1.0 + mu)
    } else {
        trace * (1.0 - mu)
    }
}
