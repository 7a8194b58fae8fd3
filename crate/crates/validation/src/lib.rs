//! Reference inputs shared by the acceptance suite.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use spopo_core::kernel::{FrequencyGrid, JointKernel};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `exp(−A(ω+ω′)² − B(ω−ω′)²)` sampled with the quadrature weight.
pub fn double_gaussian(grid: FrequencyGrid, a: f64, b: f64) -> JointKernel {
    JointKernel::from_fn(grid, |w, wp| Complex64::new((-a * (w + wp).powi(2) - b * (w - wp).powi(2)).exp(), 0.0))
}

/// Schmidt ratio `|√A − √B|/(√A + √B)` of the double Gaussian.
pub fn double_gaussian_ratio(a: f64, b: f64) -> f64 {
    (a.sqrt() - b.sqrt()).abs() / (a.sqrt() + b.sqrt())
}

/// Leading gain from the trace `∫ e^{−4Aω²} dω/2π`; eigenvalues are
/// `λ0 (±μ)ⁿ`, alternating in sign when `A > B`.
pub fn double_gaussian_leading(a: f64, b: f64) -> f64 {
    let trace = (std::f64::consts::PI / (4.0 * a)).sqrt() / (2.0 * std::f64::consts::PI);
    let mu = double_gaussian_ratio(a, b);
    if a > b {
        trace * (1.0 + mu)
    } else {
        trace * (1.0 - mu)
    }
}
