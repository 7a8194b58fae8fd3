//! Cavity input-output map per comb pair, oscillation threshold, and
//! squeezing/entanglement spectra versus the comb frequency shift `θ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Result, SpopoError};
use crate::supermodes::SupermodeBasis;
use crate::symplectic::{bogoliubov_vacuum_covariance, output_covariance, ModePairTransform};

/// Largest tolerated condition number of `1 − r e^{iθ} T_n`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    /// Output-coupler amplitude reflection, `0 < r < 1`.
    pub r: f64,
    /// Amplitude transmission, `r² + t² = 1`.
    pub t: f64,
    /// Round-trip detuning phase `Δ_RT`, rad.
    pub delta_rt: f64,
}

impl CavityConfig {
    pub fn from_r(r: f64, delta_rt: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(SpopoError::invalid("r", format!("must lie in (0, 1), got {r}")));
        }
        if !delta_rt.is_finite() {
            return Err(SpopoError::invalid("delta_rt", "must be finite"));
        }
        Ok(Self {
            r,
            t: (1.0 - r * r).sqrt(),
            delta_rt,
        })
    }

    /// Uses the convention `F = 2π/t²`.
    pub fn from_finesse(finesse: f64, delta_rt: f64) -> Result<Self> {
        if !(finesse > 2.0 * PI) {
            return Err(SpopoError::invalid("finesse", format!("must exceed 2π, got {finesse}")));
        }
        let t2 = 2.0 * PI / finesse;
        Self::from_r((1.0 - t2).sqrt(), delta_rt)
    }

    pub fn finesse(&self) -> f64 {
        2.0 * PI / (self.t * self.t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(SpopoError::invalid("r", "must lie in (0, 1)"));
        }
        if (self.r * self.r + self.t * self.t - 1.0).abs() > 1e-12 {
            return Err(SpopoError::invalid("t", "r² + t² must equal 1"));
        }
        Ok(())
    }
}

/// Which comb oscillates first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `θ = 0`, total detuning near an even multiple of π.
    Even,
    /// `θ = π`, total detuning near an odd multiple of π.
    Odd,
}

impl Branch {
    pub fn theta(self) -> f64 {
        match self {
            Branch::Even => 0.0,
            Branch::Odd => PI,
        }
    }

    /// Sign applied to `r` when reducing the odd branch to the even one.
    pub fn r_sign(self) -> f64 {
        match self {
            Branch::Even => 1.0,
            Branch::Odd => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub gain: f64,
    pub branch: Branch,
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut x = phi.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// `g_th = acosh[(1 + r²) / (2r cos(Δ_RT + Δ0))]` on the branch selected by
/// the distance of the total detuning to the nearest even or odd multiple of π.
pub fn threshold_gain(cavity: &CavityConfig, delta0: f64) -> Result<Threshold> {
    cavity.validate()?;
    let detuning = cavity.delta_rt + delta0;
    let phi = wrap_phase(detuning);
    let (branch, offset) = if phi.abs() < PI / 2.0 {
        (Branch::Even, phi.abs())
    } else if phi.abs() > PI / 2.0 {
        (Branch::Odd, PI - phi.abs())
    } else {
        return Err(SpopoError::NoFiniteThreshold { detuning });
    };
    let cos = offset.cos();
    if cos < 1e-12 {
        return Err(SpopoError::NoFiniteThreshold { detuning });
    }
    // acosh(1 + e) with e = [(1 − r)² + 2r(1 − cos)] / (2r cos), formed
    // without cancellation so that r → 1 stays accurate.
    let r = cavity.r;
    let one_minus_cos = 2.0 * (offset / 2.0).sin().powi(2);
    let e = ((1.0 - r).powi(2) + 2.0 * r * one_minus_cos) / (2.0 * r * cos);
    let gain = (e + (e * (2.0 + e)).sqrt()).ln_1p();
    Ok(Threshold { gain, branch })
}

/// Round-trip gain block `T_n = e^{iσ1Δ} [[cosh g, sinh g], [sinh g, cosh g]]`.
pub fn round_trip_block(gain: f64, detuning: f64) -> Matrix2<Complex64> {
    let (ch, sh) = (gain.cosh(), gain.sinh());
    let p = Complex64::from_polar(1.0, detuning);
    let m = p.conj();
    Matrix2::new(p * ch, p * sh, m * sh, m * ch)
}

/// Full 2×2 map `(e^{iθ}T − r)(1 − r e^{iθ}T)⁻¹` on `(a(θ), a†(−θ))`.
pub fn comb_io_matrix(gain: f64, theta: f64, cavity: &CavityConfig, delta0: f64) -> Result<Matrix2<Complex64>> {
    if !(gain >= 0.0 && gain.is_finite()) {
        return Err(SpopoError::invalid("gain", "must be non-negative and finite"));
    }
    match threshold_gain(cavity, delta0) {
        Ok(th) if gain >= th.gain => return Err(SpopoError::AtThreshold { theta }),
        Ok(_) | Err(SpopoError::NoFiniteThreshold { .. }) => {}
        Err(e) => return Err(e),
    }
    let a = round_trip_block(gain, cavity.delta_rt + delta0) * Complex64::from_polar(1.0, theta);
    let r = Complex64::new(cavity.r, 0.0);
    let id = Matrix2::<Complex64>::identity();
    let denom = id - a * r;
    let sv = denom.svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    if !(cond < MAX_CONDITION) {
        return Err(SpopoError::AtThreshold { theta });
    }
    let inv = denom.try_inverse().ok_or(SpopoError::AtThreshold { theta })?;
    Ok((a - id * r) * inv)
}

/// `C_n(θ), S_n(θ)` of `a_out(θ) = C a_in(θ) + S a_in†(−θ)`.
pub fn comb_io(gain: f64, theta: f64, cavity: &CavityConfig, delta0: f64) -> Result<ModePairTransform> {
    let m = comb_io_matrix(gain, theta, cavity, delta0)?;
    Ok(ModePairTransform::new(m[(0, 0)], m[(0, 1)]))
}

/// `θ` and `−θ` label the same comb when `θ ∈ {0, ±π}`.
fn self_paired(theta: f64) -> bool {
    let w = wrap_phase(theta);
    w == 0.0 || w.abs() == PI
}

/// Output covariance of the comb pair `(θ, −θ)` for vacuum input, ordered
/// `(x_θ, p_θ, x_{−θ}, p_{−θ})`.
pub fn pair_covariance(gain: f64, theta: f64, cavity: &CavityConfig, delta0: f64) -> Result<Matrix4<f64>> {
    let plus = comb_io(gain, theta, cavity, delta0)?;
    let minus = comb_io(gain, -theta, cavity, delta0)?;
    let zero = Complex64::new(0.0, 0.0);
    let a = DMatrix::from_row_slice(2, 2, &[plus.c, zero, zero, minus.c]);
    let b = DMatrix::from_row_slice(2, 2, &[zero, plus.s, minus.s, zero]);
    let v = bogoliubov_vacuum_covariance(&a, &b);
    Ok(Matrix4::from_fn(|i, j| v[(i, j)]))
}

/// `Var((x_θ − x_{−θ})/√2) + Var((p_θ + p_{−θ})/√2)`, minimized over a
/// relative phase rotation of the `−θ` comb. Values below 1 certify
/// entanglement of the pair.
pub fn epr_pair_check(gain: f64, theta: f64, cavity: &CavityConfig, delta0: f64) -> Result<f64> {
    if self_paired(theta) {
        return Err(SpopoError::invalid("theta", "must differ from 0 and ±π for a comb pair"));
    }
    let plus = comb_io(gain, theta, cavity, delta0)?;
    let minus = comb_io(gain, -theta, cavity, delta0)?;
    // 1 + ⟨n_θ⟩ + ⟨n_{−θ}⟩ − 2|⟨a_θ a_{−θ}⟩| for the two-mode output state.
    let n1 = plus.s.norm_sqr();
    let n2 = minus.s.norm_sqr();
    let corr = (plus.c * minus.s).norm();
    Ok(1.0 + n1 + n2 - 2.0 * corr)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub theta: f64,
    /// Quadrature variances of the detected comb: the comb itself when it is
    /// self-paired, otherwise the symmetric combination `(a_θ + a_{−θ})/√2`.
    pub var_x: f64,
    pub var_p: f64,
    /// Reduced (thermal) variance of the single comb `a_θ`.
    pub single_comb_variance: f64,
    /// `None` for self-paired shifts.
    pub epr_variance: Option<f64>,
    pub pair_covariance: Option<Matrix4<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    pub mode: usize,
    pub gain: f64,
    pub points: Vec<SpectrumPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingSpectrum {
    pub thetas: Vec<f64>,
    pub modes: Vec<ModeSpectrum>,
}

fn spectrum_point(gain: f64, theta: f64, cavity: &CavityConfig, delta0: f64) -> Result<SpectrumPoint> {
    if !(-PI..=PI).contains(&theta) {
        return Err(SpopoError::invalid("theta", format!("{theta} outside [-pi, pi]")));
    }
    let t = comb_io(gain, theta, cavity, delta0)?;
    if self_paired(theta) {
        let (var_x, var_p, _) = output_covariance(&t);
        return Ok(SpectrumPoint {
            theta,
            var_x,
            var_p,
            single_comb_variance: 0.5 + t.s.norm_sqr(),
            epr_variance: None,
            pair_covariance: None,
        });
    }
    let v = pair_covariance(gain, theta, cavity, delta0)?;
    let var_x = 0.5 * (v[(0, 0)] + v[(2, 2)] + 2.0 * v[(0, 2)]);
    let var_p = 0.5 * (v[(1, 1)] + v[(3, 3)] + 2.0 * v[(1, 3)]);
    Ok(SpectrumPoint {
        theta,
        var_x,
        var_p,
        single_comb_variance: 0.5 * (v[(0, 0)] + v[(1, 1)]),
        epr_variance: Some(epr_pair_check(gain, theta, cavity, delta0)?),
        pair_covariance: Some(v),
    })
}

/// Spectra for an explicit list of gains (mode `n` has gain `gains[n]`).
pub fn squeezing_spectrum_for_gains(
    gains: &[f64],
    cavity: &CavityConfig,
    delta0: f64,
    theta_grid: &[f64],
) -> Result<SqueezingSpectrum> {
    let modes = gains
        .iter()
        .enumerate()
        .map(|(mode, &gain)| {
            let points = theta_grid
                .iter()
                .map(|&th| spectrum_point(gain, th, cavity, delta0))
                .collect::<Result<Vec<_>>>()?;
            Ok(ModeSpectrum { mode, gain, points })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SqueezingSpectrum {
        thetas: theta_grid.to_vec(),
        modes,
    })
}

/// Spectra for the kept supermodes of `basis`.
pub fn squeezing_spectrum(
    basis: &SupermodeBasis,
    cavity: &CavityConfig,
    delta0: f64,
    theta_grid: &[f64],
) -> Result<SqueezingSpectrum> {
    squeezing_spectrum_for_gains(&basis.gains[..basis.n_kept], cavity, delta0, theta_grid)
}

/// Factor that rescales a basis so its leading gain sits at `ratio · g_th`.
pub fn gain_scale_for_ratio(max_gain: f64, ratio: f64, cavity: &CavityConfig, delta0: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(SpopoError::invalid("pump_ratio", format!("must lie in [0, 1), got {ratio}")));
    }
    if ratio == 0.0 {
        return Ok(0.0);
    }
    if !(max_gain > 0.0) {
        return Err(SpopoError::invalid("pump_ratio", "kernel has no gain to rescale"));
    }
    let th = threshold_gain(cavity, delta0)?;
    Ok(ratio * th.gain / max_gain)
}
