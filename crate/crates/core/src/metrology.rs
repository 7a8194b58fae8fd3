//! Quantum Fisher information and Cramér-Rao bounds for estimating a time
//! delay with a train of squeezed pulses.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cavity::{wrap_phase, Branch, CavityConfig};
use crate::error::{Result, SpopoError};
use crate::pulses::{min_variance_transcendental_branch, sigma2_limit, MinVarianceSolution, PulseCovariance};
use crate::supermodes::{analyze_time, synthesize_time, PulseTrain, SupermodeBasis};

/// Fraction of the asymptote that counts as converged.
pub const CONVERGENCE_FRACTION: f64 = 0.99;
/// Largest pulse number probed when searching for convergence.
pub const MAX_CONVERGENCE_N: usize = 1 << 24;

/// `Ω_mn = ∫ ψ_m*(t)(ω0 − i∂_t)ψ_n(t) dt` over the kept supermodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationGenerator {
    pub omega0: f64,
    pub omega: DMatrix<Complex64>,
}

impl TranslationGenerator {
    pub fn hermiticity_error(&self) -> f64 {
        (&self.omega - self.omega.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `α′_{n,k} = Σ_m Ω_nm ⟨a_{m,k}⟩`; rows are modes, columns pulses.
    pub fn alpha_prime(&self, amplitudes: &DMatrix<Complex64>) -> Result<DMatrix<f64>> {
        if amplitudes.nrows() != self.omega.ncols() {
            return Err(SpopoError::invalid("amplitudes", "row count must match the generator"));
        }
        let a = &self.omega * amplitudes;
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let imag = a.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(SpopoError::invalid("amplitudes", format!("alpha' must be real, imaginary part {imag:e}")));
        }
        Ok(a.map(|z| z.re))
    }
}

fn check_carrier(basis: &SupermodeBasis, omega0: f64) -> Result<()> {
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return Err(SpopoError::invalid("omega0", "must be positive"));
    }
    if basis.grid.omegas().iter().any(|w| omega0 + w <= 0.0) {
        return Err(SpopoError::invalid("omega0", "omega0 + omega must stay positive on the grid"));
    }
    Ok(())
}

pub fn omega_matrix(basis: &SupermodeBasis, omega0: f64) -> Result<TranslationGenerator> {
    check_carrier(basis, omega0)?;
    let k = basis.n_kept;
    let w = basis.grid.weight();
    let modes = basis.modes_freq.columns(0, k);
    let weighted = DMatrix::from_fn(modes.nrows(), k, |i, n| modes[(i, n)] * (w * (omega0 + basis.grid.omega(i))));
    Ok(TranslationGenerator {
        omega0,
        omega: modes.adjoint() * weighted,
    })
}

/// Mean field of an `N`-pulse probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeField {
    /// `α′_{n,k}`, rows are supermodes, columns pulses.
    pub alpha_prime: DMatrix<f64>,
    pub alpha0: f64,
    pub n_pulses: usize,
    pub mean_photons_per_pulse: f64,
    /// `Δω0²` such that `α0² = N n̄0 (ω0² + Δω0²)`, i.e. the second moment of
    /// `ω0 + ω` over the probe spectrum minus `ω0²`.
    pub spectral_spread: f64,
    /// Plain variance of the probe spectrum about its own mean.
    pub spectral_variance: f64,
    pub omega0: f64,
    /// `ψ̲′_0(ω) = ψ̲_0(ω)/(ω0 + ω)` on the frequency grid.
    pub psi_prime_freq: DVector<Complex64>,
    pub psi_prime_time: DVector<Complex64>,
    pub coefficients: DVector<f64>,
    /// `α^{(N)}(t)` sampled on each period window.
    pub envelope: PulseTrain,
}

impl ProbeField {
    pub fn total_photons(&self) -> f64 {
        self.envelope.norm_sqr()
    }
}

/// Branch of the pulse statistics for a detuning at a multiple of π.
pub fn pulse_branch(cavity: &CavityConfig, delta0: f64) -> Result<Branch> {
    let phi = wrap_phase(cavity.delta_rt + delta0);
    if phi.abs() <= 1e-12 {
        Ok(Branch::Even)
    } else if (phi.abs() - std::f64::consts::PI).abs() <= 1e-12 {
        Ok(Branch::Odd)
    } else {
        Err(SpopoError::invalid(
            "delta_rt",
            "pulse statistics need delta_rt + delta0 at a multiple of pi",
        ))
    }
}

/// `ψ′_0` from `(ω0 − i∂_t)ψ′_0 = ψ_0`, solved on the frequency grid.
pub fn probe_pulse(basis: &SupermodeBasis, omega0: f64) -> Result<DVector<Complex64>> {
    check_carrier(basis, omega0)?;
    if basis.n_kept == 0 {
        return Err(SpopoError::invalid("basis", "no supermode above the gain cutoff"));
    }
    let psi0 = basis.mode_freq(0);
    Ok(DVector::from_fn(psi0.len(), |i, _| psi0[i] / (omega0 + basis.grid.omega(i))))
}

/// `(ω0 − i∂_t)` applied spectrally to time samples on the basis window.
pub fn apply_translation_generator(samples: &DVector<Complex64>, basis: &SupermodeBasis, omega0: f64) -> Result<DVector<Complex64>> {
    let grid = &basis.grid;
    let mut spec = analyze_time(samples, grid)?;
    for (i, z) in spec.iter_mut().enumerate() {
        *z *= omega0 + grid.omega(i);
    }
    let m = DMatrix::from_column_slice(spec.len(), 1, spec.as_slice());
    Ok(synthesize_time(&m, grid).column(0).into_owned())
}

/// Optimal probe for `N` pulses: `α′ ∝ δ_{n,0} c^{(N)}`.
pub fn optimal_probe(
    basis: &SupermodeBasis,
    cavity: &CavityConfig,
    delta0: f64,
    n: usize,
    n_bar0: f64,
    omega0: f64,
    t0: f64,
) -> Result<ProbeField> {
    if !(n_bar0 > 0.0) {
        return Err(SpopoError::invalid("n_bar0", "must be positive"));
    }
    if !(t0 > 0.0) {
        return Err(SpopoError::invalid("t0", "must be positive"));
    }
    let branch = pulse_branch(cavity, delta0)?;
    let psi_prime_freq = probe_pulse(basis, omega0)?;
    let sol = min_variance_transcendental_branch(basis.max_gain(), cavity.r, n, branch)?;

    let grid = &basis.grid;
    let w = grid.weight();
    let mut norm = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (i, z) in psi_prime_freq.iter().enumerate() {
        let p = z.norm_sqr() * w;
        let om = grid.omega(i);
        norm += p;
        mean += p * om;
        second += p * om * om;
    }
    mean /= norm;
    let spectral_variance = second / norm - mean * mean;
    // Σ w |ψ̲_0|² = 1, so ⟨(ω0+ω)²⟩ over the probe spectrum is 1/‖ψ′‖².
    let spectral_spread = 1.0 / norm - omega0 * omega0;
    let alpha0 = (n as f64 * n_bar0 / norm).sqrt();

    let m = DMatrix::from_column_slice(psi_prime_freq.len(), 1, psi_prime_freq.as_slice());
    let psi_prime_time = synthesize_time(&m, grid).column(0).into_owned();
    let periods = sol
        .eigvec
        .iter()
        .map(|&c| psi_prime_time.iter().map(|z| z * (alpha0 * c)).collect())
        .collect();
    let envelope = PulseTrain {
        t0,
        dt: grid.time_step(),
        periods,
    };

    let mut alpha_prime = DMatrix::zeros(basis.n_kept, n);
    for k in 0..n {
        alpha_prime[(0, k)] = alpha0 * sol.eigvec[k];
    }
    Ok(ProbeField {
        alpha_prime,
        alpha0,
        n_pulses: n,
        mean_photons_per_pulse: n_bar0,
        spectral_spread,
        spectral_variance,
        omega0,
        psi_prime_freq,
        psi_prime_time,
        coefficients: sol.eigvec,
        envelope,
    })
}

/// `F_N = 2 Σ_n α′_nᵀ [V⁻_n]⁻¹ α′_n`, the Fisher information of a mean-field
/// shift `d⟨p_{n,k}⟩/dτ = √2 α′_{n,k}`. Modes with an all-zero `α′` row may
/// pass `None`.
pub fn fisher_information(alpha_prime: &DMatrix<f64>, v_minus: &[Option<&DMatrix<f64>>]) -> Result<f64> {
    if v_minus.len() != alpha_prime.nrows() {
        return Err(SpopoError::invalid("v_minus", "one covariance per mode row is required"));
    }
    let mut f = 0.0;
    for (n, v) in v_minus.iter().enumerate() {
        let a: DVector<f64> = alpha_prime.row(n).transpose();
        if a.iter().all(|x| *x == 0.0) {
            continue;
        }
        let v = v.ok_or_else(|| SpopoError::invalid("v_minus", format!("missing covariance for mode {n}")))?;
        if v.nrows() != a.len() || !v.is_square() {
            return Err(SpopoError::invalid("v_minus", format!("shape mismatch for mode {n}")));
        }
        let chol = v
            .clone()
            .cholesky()
            .ok_or_else(|| SpopoError::NotPositiveDefinite(format!("V- of mode {n}")))?;
        f += 2.0 * a.dot(&chol.solve(&a));
    }
    Ok(f)
}

/// Fisher information of an optimal probe against the pulse covariance of
/// supermode 0.
pub fn probe_fisher_information(probe: &ProbeField, cov: &PulseCovariance) -> Result<f64> {
    let mut v: Vec<Option<&DMatrix<f64>>> = vec![None; probe.alpha_prime.nrows()];
    if let Some(first) = v.first_mut() {
        *first = Some(&cov.v_minus);
    }
    fisher_information(&probe.alpha_prime, &v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetrologyResult {
    pub fisher: f64,
    pub delta_tau: f64,
    pub delta_tau_sql: f64,
    pub improvement: f64,
}

/// `Δτ² = σ² / (2 N n̄0 (ω0² + Δω0²))`, with the SQL at `σ² = 1/2`.
pub fn cramer_rao(sigma2_min: f64, n: usize, n_bar0: f64, omega0: f64, d_omega0_sq: f64) -> Result<MetrologyResult> {
    if !(sigma2_min > 0.0) {
        return Err(SpopoError::invalid("sigma2", "must be positive"));
    }
    if n == 0 {
        return Err(SpopoError::invalid("N", "must be at least 1"));
    }
    if !(n_bar0 > 0.0) {
        return Err(SpopoError::invalid("n_bar0", "must be positive"));
    }
    let bandwidth = omega0 * omega0 + d_omega0_sq;
    if !(omega0 > 0.0 && bandwidth > 0.0) {
        return Err(SpopoError::invalid("omega0", "omega0² + Δω0² must be positive"));
    }
    let photons = 2.0 * n as f64 * n_bar0 * bandwidth;
    let var = sigma2_min / photons;
    let var_sql = 0.5 / photons;
    Ok(MetrologyResult {
        fisher: 1.0 / var,
        delta_tau: var.sqrt(),
        delta_tau_sql: var_sql.sqrt(),
        improvement: improvement_from_sigma2(sigma2_min),
    })
}

/// `Δτ_SQL / Δτ = 1/(√2 σ)`.
pub fn improvement_from_sigma2(sigma2: f64) -> f64 {
    (0.5 / sigma2).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementCurve {
    pub ratio: f64,
    pub gain: f64,
    /// `σ²(N)` for `N = 1..=N_max`.
    pub sigma2: Vec<f64>,
    pub improvement: Vec<f64>,
    pub asymptote: f64,
    /// Smallest `N` whose improvement reaches 99% of the asymptote.
    pub min_pulses: Option<usize>,
}

fn min_sigma2(g: f64, r: f64, n: usize, branch: Branch) -> Result<MinVarianceSolution> {
    min_variance_transcendental_branch(g, r, n, branch)
}

/// Smallest `N ≤ cap` with `improvement(N) ≥ fraction · asymptote`.
pub fn convergence_pulses(g: f64, r: f64, branch: Branch, fraction: f64, cap: usize) -> Result<Option<usize>> {
    let target = fraction * improvement_from_sigma2(sigma2_limit(g, r));
    let reached = |n: usize| -> Result<bool> { Ok(improvement_from_sigma2(min_sigma2(g, r, n, branch)?.sigma2) >= target) };
    if reached(1)? {
        return Ok(Some(1));
    }
    let mut lo = 1;
    let mut hi = 2;
    while !reached(hi)? {
        if hi >= cap {
            return Ok(None);
        }
        lo = hi;
        hi = (hi * 2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reached(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Improvement versus pulse number for leading gains `ratio · g_th`.
pub fn improvement_curve(cavity: &CavityConfig, delta0: f64, ratios: &[f64], n_max: usize) -> Result<Vec<ImprovementCurve>> {
    if n_max == 0 {
        return Err(SpopoError::invalid("N_max", "must be at least 1"));
    }
    let branch = pulse_branch(cavity, delta0)?;
    let g_th = -cavity.r.ln();
    ratios
        .iter()
        .map(|&ratio| {
            if !(0.0..1.0).contains(&ratio) {
                return Err(SpopoError::invalid("ratios", format!("{ratio} outside [0, 1)")));
            }
            let gain = ratio * g_th;
            let sigma2 = (1..=n_max)
                .map(|n| Ok(min_sigma2(gain, cavity.r, n, branch)?.sigma2))
                .collect::<Result<Vec<_>>>()?;
            let improvement = sigma2.iter().map(|&s| improvement_from_sigma2(s)).collect();
            Ok(ImprovementCurve {
                ratio,
                gain,
                sigma2,
                improvement,
                asymptote: improvement_from_sigma2(sigma2_limit(gain, cavity.r)),
                min_pulses: convergence_pulses(gain, cavity.r, branch, CONVERGENCE_FRACTION, MAX_CONVERGENCE_N)?,
            })
        })
        .collect()
}
