//! Takagi (symmetric Schmidt) decomposition of the joint kernel into
//! supermodes, and the quasi-periodic frequency combs built from them.
//!
//! Mode functions are stored in two sampled forms on the same number of
//! points: `ψ̲_n(ω_i)` on the frequency grid, normalized so that
//! `Σ_i |ψ̲_n(ω_i)|² Δω/2π = 1`, and `ψ_n(t_j)` on the dual time window of
//! length `2π/Δω` centred on the pulse, normalized so that
//! `Σ_j |ψ_n(t_j)|² dt = 1`. Outside that window, and within one period, the
//! mode functions vanish.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, SpopoError};
use crate::kernel::{FrequencyGrid, JointKernel, PumpConfig};

pub const DEFAULT_GAIN_CUTOFF: f64 = 1e-6;

/// Largest tolerated `‖S̃ − W Σ Wᵀ‖_F / ‖S̃‖_F` of a factorization.
const TAKAGI_TOL: f64 = 1e-8;
/// Values below this fraction of the largest are treated as exact zeros.
const NULL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct SupermodeBasis {
    /// Gains `g_n`, descending, one per grid point.
    pub gains: Vec<f64>,
    /// Column `n` holds `ψ̲_n(ω_i)`.
    pub modes_freq: DMatrix<Complex64>,
    /// Column `n` holds `ψ_n(t_j)` on the dual time window.
    pub modes_time: DMatrix<Complex64>,
    /// Number of modes with `g_n ≥ cutoff · g_0`.
    pub n_kept: usize,
    pub grid: FrequencyGrid,
}

impl SupermodeBasis {
    pub fn n_modes(&self) -> usize {
        self.gains.len()
    }

    pub fn max_gain(&self) -> f64 {
        self.gains.first().copied().unwrap_or(0.0)
    }

    pub fn mode_freq(&self, n: usize) -> DVector<Complex64> {
        self.modes_freq.column(n).into_owned()
    }

    pub fn mode_time(&self, n: usize) -> DVector<Complex64> {
        self.modes_time.column(n).into_owned()
    }

    pub fn time_step(&self) -> f64 {
        self.grid.time_step()
    }

    /// Gram matrix `⟨ψ_m, ψ_n⟩` of the first `count` modes under the
    /// frequency quadrature weight.
    pub fn gram(&self, count: usize) -> DMatrix<Complex64> {
        let cols = self.modes_freq.columns(0, count);
        cols.adjoint() * cols * Complex64::new(self.grid.weight(), 0.0)
    }

    /// Largest entry of `|Gram − I|` over the kept modes.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.gram(self.n_kept);
        let mut worst = 0.0f64;
        for i in 0..self.n_kept {
            for j in 0..self.n_kept {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `‖S̃ − Σ_n g_n ψ_n ψ_nᵀ‖_F / ‖S̃‖_F` with all modes, in the unit-norm
    /// discrete representation.
    pub fn reconstruction_residual(&self, kernel: &JointKernel) -> f64 {
        let norm = kernel.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut w = self.modes_freq.clone() * Complex64::new(self.grid.weight().sqrt(), 0.0);
        for (n, g) in self.gains.iter().enumerate() {
            let scale = Complex64::new(g.sqrt(), 0.0);
            w.column_mut(n).iter_mut().for_each(|z| *z *= scale);
        }
        let approx = &w * w.transpose();
        (&kernel.matrix - approx).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / norm
    }

    /// Copy with all gains multiplied by `factor`; mode functions unchanged.
    pub fn with_scaled_gains(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.gains.iter_mut().for_each(|g| *g *= factor);
        out
    }
}

/// Takagi factorization `S̃ = W Σ Wᵀ` with `W` unitary and `Σ ≥ 0`.
///
/// With `S̃ = A + iB`, the real symmetric matrix `[[A, B], [B, −A]]` has
/// eigenvalues `±σ_k`; an eigenvector `(x, y)` for `σ_k ≥ 0` gives the column
/// `w = x + iy` with `S̃ w̄ = σ_k w`. Columns are accepted in descending order
/// after complex Gram-Schmidt; the null space is filled by an orthonormal
/// complement.
pub fn takagi(matrix: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = matrix.nrows();
    if !matrix.is_square() {
        return Err(SpopoError::invalid("kernel", "matrix must be square"));
    }
    let mut embed = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = matrix[(i, j)];
            embed[(i, j)] = z.re;
            embed[(i, n + j)] = z.im;
            embed[(n + i, j)] = z.im;
            embed[(n + i, n + j)] = -z.re;
        }
    }
    let eig = SymmetricEigen::new(embed);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let top = order.first().map(|&k| eig.eigenvalues[k]).unwrap_or(0.0).max(0.0);
    let mut sigma = Vec::with_capacity(n);
    let mut w = DMatrix::<Complex64>::zeros(n, n);
    for &k in &order {
        let lambda = eig.eigenvalues[k];
        if sigma.len() == n || lambda <= NULL_TOL * top {
            break;
        }
        let col = eig.eigenvectors.column(k);
        let mut v = DVector::from_fn(n, |i, _| Complex64::new(col[i], col[n + i]));
        for m in 0..sigma.len() {
            let prev = w.column(m);
            let proj = prev.dotc(&v);
            v -= prev * proj;
        }
        let norm = v.norm();
        if norm < 0.5 {
            continue;
        }
        w.set_column(sigma.len(), &(v / Complex64::new(norm, 0.0)));
        sigma.push(lambda);
    }
    // Complete the null space with an orthonormal complement.
    let kept = sigma.len();
    if kept < n {
        let mut aug = DMatrix::<Complex64>::zeros(n, kept + n);
        aug.columns_mut(0, kept).copy_from(&w.columns(0, kept));
        aug.columns_mut(kept, n).fill_with_identity();
        let q = aug.qr().q();
        w.columns_mut(kept, n - kept).copy_from(&q.columns(kept, n - kept));
        sigma.resize(n, 0.0);
    }

    let scale = matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale > 0.0 {
        let mut ws = w.clone();
        for (k, s) in sigma.iter().enumerate() {
            ws.column_mut(k).iter_mut().for_each(|z| *z *= *s);
        }
        let residual = (matrix - ws * w.transpose()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / scale;
        if !(residual <= TAKAGI_TOL) {
            return Err(SpopoError::NumericalFailure(format!("Takagi residual {residual:e}")));
        }
    }
    Ok((sigma, w))
}

/// Decomposes a symmetric kernel into gains and supermodes.
pub fn schmidt_decompose(kernel: &JointKernel, gain_cutoff: f64) -> Result<SupermodeBasis> {
    let scale = kernel.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let asym = kernel.asymmetry();
    if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(SpopoError::AsymmetricKernel { asymmetry: asym });
    }
    if !(gain_cutoff >= 0.0) {
        return Err(SpopoError::invalid("gain_cutoff", "must be non-negative"));
    }
    let grid = kernel.grid;
    let (gains, mut w) = takagi(&kernel.matrix)?;
    fix_sign_gauge(&mut w);

    let modes_freq = &w * Complex64::new(1.0 / grid.weight().sqrt(), 0.0);
    let modes_time = synthesize_time(&modes_freq, &grid);
    let top = gains.first().copied().unwrap_or(0.0);
    let n_kept = if top > 0.0 {
        gains.iter().take_while(|&&g| g >= gain_cutoff * top).count()
    } else {
        0
    };
    Ok(SupermodeBasis {
        gains,
        modes_freq,
        modes_time,
        n_kept,
        grid,
    })
}

/// Takagi vectors are fixed up to a sign; pick the one whose largest-magnitude
/// sample has a positive real part (positive imaginary part if it is purely
/// imaginary).
fn fix_sign_gauge(w: &mut DMatrix<Complex64>) {
    for mut col in w.column_iter_mut() {
        let Some(peak) = col.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) else {
            continue;
        };
        let flip = if peak.re.abs() > 1e-12 * peak.norm() {
            peak.re < 0.0
        } else {
            peak.im < 0.0
        };
        if flip {
            col.iter_mut().for_each(|z| *z = -*z);
        }
    }
}

/// `ψ(t_j) = Σ_i (Δω/2π) ψ̲(ω_i) e^{iω_i t_j}` for every column, by FFT.
pub fn synthesize_time(modes_freq: &DMatrix<Complex64>, grid: &FrequencyGrid) -> DMatrix<Complex64> {
    let n = grid.n_points();
    let c = grid.center();
    let w = grid.weight();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = DMatrix::zeros(n, modes_freq.ncols());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..modes_freq.ncols() {
        for i in 0..n {
            // Frequency index offset i - c placed at (i - c) mod n.
            buf[(i + n - c) % n] = modes_freq[(i, m)] * w;
        }
        fft.process(&mut buf);
        for j in 0..n {
            out[(j, m)] = buf[(j + n - c) % n];
        }
    }
    out
}

/// Inverse of [`synthesize_time`]: `ψ̲(ω_i) = Σ_j dt ψ(t_j) e^{−iω_i t_j}`.
pub fn analyze_time(samples: &DVector<Complex64>, grid: &FrequencyGrid) -> Result<DVector<Complex64>> {
    let n = grid.n_points();
    if samples.len() != n {
        return Err(SpopoError::GridMismatch(format!("{} time samples for a {n}-point grid", samples.len())));
    }
    let c = grid.center();
    let dt = grid.time_step();
    let mut buf: Vec<Complex64> = (0..n).map(|k| samples[(k + c) % n] * dt).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(DVector::from_fn(n, |i, _| buf[(i + n - c) % n]))
}

/// Field samples on the per-period windows `k T0 + t_j`, `k = 0..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pub t0: f64,
    pub dt: f64,
    /// One block of window samples per period.
    pub periods: Vec<Vec<Complex64>>,
}

impl PulseTrain {
    pub fn zeros(basis: &SupermodeBasis, t0: f64, k_periods: usize) -> Self {
        Self {
            t0,
            dt: basis.time_step(),
            periods: vec![vec![Complex64::new(0.0, 0.0); basis.grid.n_points()]; k_periods],
        }
    }

    pub fn k_periods(&self) -> usize {
        self.periods.len()
    }

    /// `∫ |f|² dt` over all periods.
    pub fn norm_sqr(&self) -> f64 {
        self.periods.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>() * self.dt
    }

    fn check_compatible(&self, other: &PulseTrain) -> Result<()> {
        let same = self.t0 == other.t0
            && self.dt == other.dt
            && self.periods.len() == other.periods.len()
            && self.periods.iter().zip(&other.periods).all(|(a, b)| a.len() == b.len());
        if same {
            Ok(())
        } else {
            Err(SpopoError::GridMismatch("pulse trains are sampled differently".into()))
        }
    }

    /// `∫ f* g dt` over all periods.
    pub fn inner(&self, other: &PulseTrain) -> Result<Complex64> {
        self.check_compatible(other)?;
        let sum: Complex64 = self
            .periods
            .iter()
            .flatten()
            .zip(other.periods.iter().flatten())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.dt)
    }

    fn check_basis(&self, basis: &SupermodeBasis) -> Result<()> {
        if self.dt != basis.time_step() || self.periods.iter().any(|p| p.len() != basis.grid.n_points()) {
            return Err(SpopoError::GridMismatch("field window differs from the basis time grid".into()));
        }
        Ok(())
    }
}

/// A quasi-periodic comb `f_n(θ, t)` sampled over `K` periods.
#[derive(Debug, Clone, PartialEq)]
pub struct CombFunction {
    pub n: usize,
    pub theta: f64,
    /// Pulse-to-pulse carrier-envelope phase `θ + Δ0`.
    pub ceo: f64,
    pub samples: PulseTrain,
}

impl CombFunction {
    /// Largest `|f(t + T0) − f(t) e^{i(θ+Δ0)}|` over sampled points.
    pub fn quasi_periodicity_error(&self) -> f64 {
        let phase = Complex64::from_polar(1.0, self.ceo);
        self.samples
            .periods
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(move |(a, b)| (b - a * phase).norm()))
            .fold(0.0, f64::max)
    }
}

fn check_window(basis: &SupermodeBasis, t0: f64) -> Result<()> {
    if basis.grid.time_window() > t0 {
        return Err(SpopoError::GridMismatch(format!(
            "time window {} s of the frequency grid exceeds the period {} s",
            basis.grid.time_window(),
            t0
        )));
    }
    Ok(())
}

/// `f_n(θ, t) = (2π)^{−1/2} Σ_k ψ_n(t − kT0) e^{ik(θ+Δ0)}` for `k = 0..K`.
pub fn synthesize_comb(
    basis: &SupermodeBasis,
    n: usize,
    theta: f64,
    k_periods: usize,
    pump: &PumpConfig,
) -> Result<CombFunction> {
    if n >= basis.n_kept {
        return Err(SpopoError::IndexOutOfRange { index: n, limit: basis.n_kept });
    }
    synthesize_comb_any(basis, n, theta, k_periods, pump)
}

/// As [`synthesize_comb`] but allows discarded modes (used by the
/// completeness expansion).
fn synthesize_comb_any(
    basis: &SupermodeBasis,
    n: usize,
    theta: f64,
    k_periods: usize,
    pump: &PumpConfig,
) -> Result<CombFunction> {
    if !(-PI..=PI).contains(&theta) {
        return Err(SpopoError::invalid("theta", format!("{theta} outside [-pi, pi]")));
    }
    if n >= basis.n_modes() {
        return Err(SpopoError::IndexOutOfRange { index: n, limit: basis.n_modes() });
    }
    check_window(basis, pump.t0)?;
    let ceo = theta + pump.delta0;
    let norm = 1.0 / (2.0 * PI).sqrt();
    let psi = basis.modes_time.column(n);
    let periods = (0..k_periods)
        .map(|k| {
            let phase = Complex64::from_polar(norm, k as f64 * ceo);
            psi.iter().map(|z| z * phase).collect()
        })
        .collect();
    Ok(CombFunction {
        n,
        theta,
        ceo,
        samples: PulseTrain {
            t0: pump.t0,
            dt: basis.time_step(),
            periods,
        },
    })
}

/// `⟨f, g⟩` over the sampled window, divided by the number of periods.
pub fn comb_inner_product(f: &CombFunction, g: &CombFunction) -> Result<Complex64> {
    let k = f.samples.k_periods().max(1) as f64;
    Ok(f.samples.inner(&g.samples)? / k)
}

/// `a_{n,k} = ∫_{period k} ψ_n*(t − kT0) a(t) dt`.
pub fn project_pulse(field: &PulseTrain, basis: &SupermodeBasis, n: usize, k: usize) -> Result<Complex64> {
    field.check_basis(basis)?;
    if n >= basis.n_modes() {
        return Err(SpopoError::IndexOutOfRange { index: n, limit: basis.n_modes() });
    }
    let block = field.periods.get(k).ok_or(SpopoError::IndexOutOfRange {
        index: k,
        limit: field.k_periods(),
    })?;
    let psi = basis.modes_time.column(n);
    let sum: Complex64 = psi.iter().zip(block).map(|(p, a)| p.conj() * a).sum();
    Ok(sum * field.dt)
}

/// `a(t) = Σ_{n,k} a_{n,k} ψ_n(t − kT0)`; `coefficients[n][k]`.
pub fn synthesize_pulses(
    basis: &SupermodeBasis,
    coefficients: &[Vec<Complex64>],
    t0: f64,
) -> Result<PulseTrain> {
    check_window(basis, t0)?;
    let k_periods = coefficients.iter().map(Vec::len).max().unwrap_or(0);
    let mut train = PulseTrain::zeros(basis, t0, k_periods);
    for (n, row) in coefficients.iter().enumerate() {
        if n >= basis.n_modes() {
            return Err(SpopoError::IndexOutOfRange { index: n, limit: basis.n_modes() });
        }
        let psi = basis.modes_time.column(n);
        for (k, a) in row.iter().enumerate() {
            for (dst, p) in train.periods[k].iter_mut().zip(psi.iter()) {
                *dst += a * p;
            }
        }
    }
    Ok(train)
}

/// Equispaced frequency shifts `θ_m = 2πm/K` folded into `(−π, π]`.
pub fn theta_grid(k_periods: usize) -> Vec<f64> {
    (0..k_periods)
        .map(|m| {
            let t = 2.0 * PI * m as f64 / k_periods as f64;
            if t > PI {
                t - 2.0 * PI
            } else {
                t
            }
        })
        .collect()
}

/// Comb amplitudes `α_n(θ_m) = ∫ f_n*(θ_m, t) α(t) dt` for all modes on the
/// shift grid of [`theta_grid`]; indexed `[n][m]`.
pub fn comb_coefficients(field: &PulseTrain, basis: &SupermodeBasis, pump: &PumpConfig) -> Result<Vec<Vec<Complex64>>> {
    field.check_basis(basis)?;
    let k = field.k_periods();
    let thetas = theta_grid(k);
    (0..basis.n_modes())
        .map(|n| {
            thetas
                .iter()
                .map(|&th| {
                    let comb = synthesize_comb_any(basis, n, th, k, pump)?;
                    comb.samples.inner(field)
                })
                .collect()
        })
        .collect()
}

/// Inverse of [`comb_coefficients`]: `α(t) = Σ_n Σ_m (2π/K) α_n(θ_m) f_n(θ_m, t)`.
pub fn reconstruct_from_combs(
    coefficients: &[Vec<Complex64>],
    basis: &SupermodeBasis,
    pump: &PumpConfig,
) -> Result<PulseTrain> {
    let k = coefficients.first().map(Vec::len).unwrap_or(0);
    let thetas = theta_grid(k);
    let dtheta = 2.0 * PI / k.max(1) as f64;
    let mut out = PulseTrain::zeros(basis, pump.t0, k);
    for (n, row) in coefficients.iter().enumerate() {
        for (&th, a) in thetas.iter().zip(row) {
            let comb = synthesize_comb_any(basis, n, th, k, pump)?;
            let weight = a * dtheta;
            for (dst, src) in out.periods.iter_mut().flatten().zip(comb.samples.periods.iter().flatten()) {
                *dst += weight * src;
            }
        }
    }
    Ok(out)
}
