//! Discretized joint down-conversion kernel on a signal-detuning grid.
//!
//! The kernel stored here already carries the rectangle-rule weight
//! `Δω/2π`, so its Takagi values are the parametric gains directly.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SpopoError};

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_818_8e-12;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Largest admissible pump spectral amplitude at the edge of the pump-frequency
/// window, relative to the peak.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

/// Uniform, zero-centred grid of signal detunings `ω` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    n_points: usize,
    omega_max: f64,
    delta_omega: f64,
}

impl FrequencyGrid {
    pub fn new(n_points: usize, omega_max: f64) -> Result<Self> {
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(SpopoError::invalid("n_points", format!("must be odd and >= 3, got {n_points}")));
        }
        if !(omega_max > 0.0 && omega_max.is_finite()) {
            return Err(SpopoError::invalid("omega_max", "must be positive and finite"));
        }
        Ok(Self {
            n_points,
            omega_max,
            delta_omega: 2.0 * omega_max / (n_points - 1) as f64,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    /// Index of `ω = 0`.
    pub fn center(&self) -> usize {
        (self.n_points - 1) / 2
    }

    pub fn omega(&self, i: usize) -> f64 {
        (i as f64 - self.center() as f64) * self.delta_omega
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.omega(i)).collect()
    }

    /// Quadrature weight `Δω/2π`.
    pub fn weight(&self) -> f64 {
        self.delta_omega / (2.0 * PI)
    }

    /// Sampling step of the dual time grid, `2π/(n Δω)`.
    pub fn time_step(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.delta_omega)
    }

    /// Length of the dual time window, `2π/Δω`.
    pub fn time_window(&self) -> f64 {
        2.0 * PI / self.delta_omega
    }

    /// Dual time grid, zero-centred, same number of points.
    pub fn time(&self, j: usize) -> f64 {
        (j as f64 - self.center() as f64) * self.time_step()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeShape {
    Gaussian,
}

/// Pump pulse train parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpConfig {
    /// Pulse energy `E_p`, J.
    pub energy: f64,
    /// Intensity FWHM, s.
    pub tau_p: f64,
    pub shape: EnvelopeShape,
    /// Half the pump carrier-envelope offset, rad.
    pub delta0: f64,
    /// Repetition period, s.
    pub t0: f64,
}

impl PumpConfig {
    pub fn gaussian(energy: f64, tau_p: f64, delta0: f64, t0: f64) -> Result<Self> {
        let p = Self {
            energy,
            tau_p,
            shape: EnvelopeShape::Gaussian,
            delta0,
            t0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.energy >= 0.0 && self.energy.is_finite()) {
            return Err(SpopoError::invalid("energy", "must be non-negative"));
        }
        if !(self.tau_p > 0.0) {
            return Err(SpopoError::invalid("tau_p", "must be positive"));
        }
        if !(self.t0 > 0.0) {
            return Err(SpopoError::invalid("t0", "must be positive"));
        }
        if self.tau_p >= self.t0 / 20.0 {
            return Err(SpopoError::invalid(
                "tau_p",
                format!("pulse duration {} s is not short against the period {} s (need < T0/20)", self.tau_p, self.t0),
            ));
        }
        if !self.delta0.is_finite() {
            return Err(SpopoError::invalid("delta0", "must be finite"));
        }
        Ok(())
    }

    /// Amplitude width `σ_t` of `α_p(t) ∝ exp(−t²/2σ_t²)`.
    pub fn sigma_t(&self) -> f64 {
        match self.shape {
            EnvelopeShape::Gaussian => self.tau_p / (2.0 * 2f64.ln().sqrt()),
        }
    }

    /// Unit-norm temporal envelope `α_p(t)`, s^{-1/2}.
    pub fn envelope_time(&self, t: f64) -> Complex64 {
        match self.shape {
            EnvelopeShape::Gaussian => {
                let s = self.sigma_t();
                let amp = (PI * s * s).powf(-0.25) * (-t * t / (2.0 * s * s)).exp();
                Complex64::new(amp, 0.0)
            }
        }
    }

    /// `α̲_p(ω) = ∫ α_p(t) e^{−iωt} dt`, s^{1/2}.
    pub fn envelope_freq(&self, omega: f64) -> Complex64 {
        match self.shape {
            EnvelopeShape::Gaussian => {
                let s = self.sigma_t();
                let amp = (4.0 * PI * s * s).powf(0.25) * (-s * s * omega * omega / 2.0).exp();
                Complex64::new(amp, 0.0)
            }
        }
    }

    /// `Σ |α̲_p(kΔω)|² Δω/2π` over the pump-frequency window `|ω+ω′| ≤ 2 ω_max`.
    pub fn spectral_norm(&self, grid: &FrequencyGrid) -> f64 {
        let n = grid.n_points() as i64 - 1;
        (-n..=n)
            .map(|k| self.envelope_freq(k as f64 * grid.delta_omega()).norm_sqr())
            .sum::<f64>()
            * grid.weight()
    }

    /// `Σ |α_p(t_j)|² dt` over the time grid dual to the pump-frequency window.
    pub fn temporal_norm(&self, grid: &FrequencyGrid) -> f64 {
        let m = 2 * grid.n_points() as i64 - 1;
        let dt = 2.0 * PI / (m as f64 * grid.delta_omega());
        let half = (m - 1) / 2;
        (-half..=half)
            .map(|j| self.envelope_time(j as f64 * dt).norm_sqr())
            .sum::<f64>()
            * dt
    }

    /// Edge-to-peak ratio of the pump spectrum at `ω+ω′ = 2 ω_max`.
    pub fn edge_ratio(&self, grid: &FrequencyGrid) -> f64 {
        self.envelope_freq(2.0 * grid.omega_max()).norm() / self.envelope_freq(0.0).norm()
    }
}

/// Truncated Taylor polynomial `k(ω_c + ω) = Σ_j c_j ω^j`, `c_j` in m⁻¹·(s/rad)^j.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dispersion(pub [f64; 4]);

impl Dispersion {
    pub fn eval(&self, omega: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * omega + c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalConfig {
    /// Crystal length `l_c`, m.
    pub length: f64,
    /// Effective nonlinearity, m/V.
    pub d_eff: f64,
    /// Mean signal refractive index.
    pub n0: f64,
    /// Effective interaction area, m².
    pub a_eff: f64,
    /// Signal wavenumber around `ω0`.
    pub signal_dispersion: Dispersion,
    /// Pump wavenumber around `2ω0`.
    pub pump_dispersion: Dispersion,
    /// Signal carrier, rad/s.
    pub omega0: f64,
}

impl CrystalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(SpopoError::invalid("length", "must be positive"));
        }
        if !(self.a_eff > 0.0) {
            return Err(SpopoError::invalid("a_eff", "must be positive"));
        }
        if !(self.n0 >= 1.0) {
            return Err(SpopoError::invalid("n0", "must be >= 1"));
        }
        if !(self.omega0 > 0.0) {
            return Err(SpopoError::invalid("omega0", "must be positive"));
        }
        if !self.d_eff.is_finite() {
            return Err(SpopoError::invalid("d_eff", "must be finite"));
        }
        Ok(())
    }

    /// Phase mismatch `Δφ = l_c [k_s(ω) + k_s(ω′) − k_p(ω+ω′)] / 2`.
    ///
    /// Terms are grouped by order so the large zero-order wavenumbers cancel
    /// before they meet the small dispersive corrections.
    pub fn phase_mismatch(&self, omega: f64, omega_prime: f64) -> f64 {
        let s = &self.signal_dispersion.0;
        let p = &self.pump_dispersion.0;
        let sum = omega + omega_prime;
        let mut dk = 2.0 * s[0] - p[0];
        let (mut wj, mut wpj, mut sj) = (1.0, 1.0, 1.0);
        for j in 1..4 {
            wj *= omega;
            wpj *= omega_prime;
            sj *= sum;
            dk += s[j] * (wj + wpj) - p[j] * sj;
        }
        0.5 * self.length * dk
    }
}

/// Effective nonlinear coefficient `χ0 = sqrt(2ω0²/(ε0 n0³ c³ A_eff)) · d_eff`.
pub fn chi0(crystal: &CrystalConfig) -> Result<f64> {
    if !(crystal.a_eff > 0.0) {
        return Err(SpopoError::invalid("a_eff", "must be positive"));
    }
    if !(crystal.n0 > 0.0) {
        return Err(SpopoError::invalid("n0", "must be positive"));
    }
    let w = crystal.omega0;
    let denom = EPSILON_0 * crystal.n0.powi(3) * SPEED_OF_LIGHT.powi(3) * crystal.a_eff;
    Ok((2.0 * w * w / denom).sqrt() * crystal.d_eff)
}

/// `sin x / x` with the analytic limit at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Phase-matching function `Φ(ω, ω′) = sinc Δφ(ω, ω′)`.
pub fn phase_matching(crystal: &CrystalConfig, omega: f64, omega_prime: f64) -> f64 {
    sinc(crystal.phase_mismatch(omega, omega_prime))
}

/// Symmetric kernel matrix `S̃(i,j)` on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointKernel {
    pub matrix: DMatrix<Complex64>,
    pub grid: FrequencyGrid,
}

impl JointKernel {
    /// Samples a continuous kernel `f(ω, ω′)` and applies the quadrature weight.
    /// Only the upper triangle of `f` is evaluated; the matrix is mirrored.
    pub fn from_fn(grid: FrequencyGrid, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let n = grid.n_points();
        let w = grid.weight();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(grid.omega(i), grid.omega(j)) * w;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { matrix: m, grid }
    }

    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
            }
        }
        worst
    }

    /// Multiplies every entry by `factor` (gains scale linearly).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * Complex64::new(factor, 0.0),
            grid: self.grid,
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Builds `S̃(i,j) = (Δω/2π) χ0 l_c √E_p α̲_p(ω_i+ω_j) Φ(ω_i, ω_j)`.
pub fn build_kernel(grid: &FrequencyGrid, pump: &PumpConfig, crystal: &CrystalConfig) -> Result<JointKernel> {
    pump.validate()?;
    crystal.validate()?;
    let edge = pump.edge_ratio(grid);
    if edge > LEAKAGE_LIMIT {
        return Err(SpopoError::SpectralLeakage {
            edge_ratio: edge,
            limit: LEAKAGE_LIMIT,
        });
    }
    let prefactor = chi0(crystal)? * crystal.length * pump.energy.sqrt();
    Ok(JointKernel::from_fn(*grid, |w, wp| {
        pump.envelope_freq(w + wp) * (prefactor * phase_matching(crystal, w, wp))
    }))
}
