//! Pulse-train quadrature covariances of one supermode and their
//! minimum-variance eigenstructure.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::cavity::Branch;
use crate::error::{Result, SpopoError};

/// Largest neglected tail of squared series coefficients.
pub const SERIES_TAIL_TOL: f64 = 1e-14;
/// Largest matrix handed to the dense eigensolver.
pub const MAX_DIRECT_N: usize = 4096;

const BRACKET_EPS: f64 = 1e-12;
const BISECTION_ITERS: usize = 200;
const BRACKET_SCAN: usize = 64;

fn check_inputs(g: f64, r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(SpopoError::invalid("r", format!("must lie in [0, 1), got {r}")));
    }
    if !(g >= 0.0 && g.is_finite()) {
        return Err(SpopoError::invalid("g", "must be non-negative and finite"));
    }
    Ok(())
}

fn check_cavity(g: f64, r: f64) -> Result<()> {
    check_inputs(g, r)?;
    if r * g.exp() >= 1.0 {
        return Err(SpopoError::AboveThreshold {
            gain: g,
            threshold: -r.ln(),
        });
    }
    Ok(())
}

/// Coefficients of `q_out,k = Σ_s c_s q_in,k−s` for the x (`+g`) and p (`−g`)
/// quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

fn series_tail(r: f64, t: f64, rho: f64, s_max: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    // Σ_{s > s_max} (t² r^{s−1} e^{sg})² = t⁴/r² · ρ^{2(s_max+1)} / (1 − ρ²)
    t.powi(4) / (r * r) * rho.powi(2 * (s_max as i32 + 1)) / (1.0 - rho * rho)
}

pub fn io_series_coefficients(g: f64, r: f64, t: f64, branch: Branch, s_max: Option<usize>) -> Result<SeriesCoefficients> {
    check_cavity(g, r)?;
    if (r * r + t * t - 1.0).abs() > 1e-12 {
        return Err(SpopoError::invalid("t", "r² + t² must equal 1"));
    }
    let rho_plus = r * g.exp();
    let s_max = match s_max {
        Some(s) => {
            let tail = series_tail(r, t, rho_plus, s);
            if tail > SERIES_TAIL_TOL {
                return Err(SpopoError::invalid("s_max", format!("truncated tail {tail:e} exceeds {SERIES_TAIL_TOL:e}")));
            }
            s
        }
        None if r == 0.0 => 1,
        None => {
            let mut s = 1;
            while series_tail(r, t, rho_plus, s) > SERIES_TAIL_TOL {
                s += 1;
            }
            s
        }
    };
    let rs = r * branch.r_sign();
    let build = |sign: f64| {
        let mut c = Vec::with_capacity(s_max + 1);
        c.push(-rs);
        let mut term = t * t * (sign * g).exp();
        for _ in 1..=s_max {
            c.push(term);
            term *= rs * (sign * g).exp();
        }
        c
    };
    Ok(SeriesCoefficients {
        plus: build(1.0),
        minus: build(-1.0),
    })
}

/// Toeplitz quadrature covariances of `N` consecutive output pulses for
/// coherent input. Absolute units: vacuum is 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseCovariance {
    pub n: usize,
    pub g: f64,
    pub r: f64,
    pub t: f64,
    pub branch: Branch,
    pub v_plus: DMatrix<f64>,
    pub v_minus: DMatrix<f64>,
}

/// `(diagonal, off-diagonal prefactor, ratio)` for one quadrature.
fn toeplitz_params(g: f64, r: f64, sign: f64) -> (f64, f64, f64) {
    let t2 = 1.0 - r * r;
    let e = (sign * g).exp();
    let rho = r * e;
    let den = 1.0 - rho * rho;
    let diag = 0.5 * (r * r + t2 * t2 * e * e / den);
    let off = -0.5 * t2 * (1.0 - e * e) / den;
    (diag, off, rho)
}

fn toeplitz(n: usize, diag: f64, off: f64, ratio: f64) -> DMatrix<f64> {
    let mut col = vec![diag; n];
    let mut p = off;
    for c in col.iter_mut().skip(1) {
        p *= ratio;
        *c = p;
    }
    DMatrix::from_fn(n, n, |j, k| col[j.abs_diff(k)])
}

/// Quadrature selector: `X` amplified by `e^{+g}`, `P` squeezed by `e^{−g}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

/// One Toeplitz covariance block. The `P` block stays finite up to and at
/// `g = −ln r`; the `X` block requires `r e^g < 1`.
pub fn quadrature_covariance(g: f64, r: f64, n: usize, branch: Branch, quadrature: Quadrature) -> Result<DMatrix<f64>> {
    match quadrature {
        Quadrature::X => check_cavity(g, r)?,
        Quadrature::P => check_inputs(g, r)?,
    }
    if n == 0 {
        return Err(SpopoError::invalid("N", "must be at least 1"));
    }
    let sign = match quadrature {
        Quadrature::X => 1.0,
        Quadrature::P => -1.0,
    };
    let (d, o, q) = toeplitz_params(g, r * branch.r_sign(), sign);
    Ok(toeplitz(n, d, o, q))
}

impl PulseCovariance {
    pub fn new(g: f64, r: f64, n: usize) -> Result<Self> {
        Self::with_branch(g, r, n, Branch::Even)
    }

    /// The odd branch is the even one with `r → −r`.
    pub fn with_branch(g: f64, r: f64, n: usize, branch: Branch) -> Result<Self> {
        check_cavity(g, r)?;
        if n == 0 {
            return Err(SpopoError::invalid("N", "must be at least 1"));
        }
        Ok(Self {
            n,
            g,
            r,
            t: (1.0 - r * r).sqrt(),
            branch,
            v_plus: quadrature_covariance(g, r, n, branch, Quadrature::X)?,
            v_minus: quadrature_covariance(g, r, n, branch, Quadrature::P)?,
        })
    }

    /// `V⁻[k][k]` relative to the vacuum variance.
    pub fn normalized_minus_diagonal(&self) -> f64 {
        self.v_minus[(0, 0)] / 0.5
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinVarianceSolution {
    /// Root of the transcendental equation; `None` for direct solves.
    pub theta_sol: Option<f64>,
    pub sigma2: f64,
    pub eigvec: DVector<f64>,
}

impl MinVarianceSolution {
    pub fn sigma2_normalized(&self) -> f64 {
        self.sigma2 / 0.5
    }
}

fn fix_central_sign(v: &mut DVector<f64>) {
    let mid = (v.len() - 1) / 2;
    if v[mid] < 0.0 {
        v.neg_mut();
    }
}

/// `½|(r − e^{iθ}e^{−g}) / (1 − r e^{iθ}e^{−g})|²`.
pub fn sigma2_at_theta(g: f64, r: f64, theta: f64) -> f64 {
    let z = Complex64::from_polar((-g).exp(), theta);
    0.5 * ((r - z) / (1.0 - r * z)).norm_sqr()
}

/// Squeezed-comb limit `½[(r − e^{−g})/(1 − r e^{−g})]²`.
pub fn sigma2_limit(g: f64, r: f64) -> f64 {
    sigma2_at_theta(g, r, 0.0)
}

/// Root of `cos((N+1)θ/2) − ρ cos((N−1)θ/2)` on `(0, π/N)`, `ρ = r e^{−g}`.
pub fn solve_theta(g: f64, r: f64, n: usize) -> Result<f64> {
    let rho = r * (-g).exp();
    let nf = n as f64;
    let h = |th: f64| (0.5 * (nf + 1.0) * th).cos() - rho * (0.5 * (nf - 1.0) * th).cos();
    let lo0 = BRACKET_EPS;
    let hi0 = PI / nf - BRACKET_EPS;
    let step = (hi0 - lo0) / BRACKET_SCAN as f64;
    let mut bracket = None;
    let mut a = lo0;
    let mut ha = h(a);
    for i in 1..=BRACKET_SCAN {
        let b = if i == BRACKET_SCAN { hi0 } else { lo0 + step * i as f64 };
        let hb = h(b);
        if ha == 0.0 {
            return Ok(a);
        }
        if ha * hb <= 0.0 {
            bracket = Some((a, b, ha));
            break;
        }
        a = b;
        ha = hb;
    }
    let (mut lo, mut hi, mut hlo) = bracket.ok_or_else(|| {
        SpopoError::NumericalFailure(format!("no sign change bracketing theta for N={n}, rho={rho}"))
    })?;
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid);
        if hm == 0.0 {
            return Ok(mid);
        }
        if hlo * hm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hlo = hm;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimum eigenpair of `V⁻(N)` from the closed-form eigenstructure.
pub fn min_variance_transcendental(g: f64, r: f64, n: usize) -> Result<MinVarianceSolution> {
    min_variance_transcendental_branch(g, r, n, Branch::Even)
}

pub fn min_variance_transcendental_branch(g: f64, r: f64, n: usize, branch: Branch) -> Result<MinVarianceSolution> {
    check_cavity(g, r)?;
    if n == 0 {
        return Err(SpopoError::invalid("N", "must be at least 1"));
    }
    let theta = solve_theta(g, r, n)?;
    // |(r − z)/(1 − r z)| = 1 on the unit circle.
    let sigma2 = if g == 0.0 { 0.5 } else { sigma2_at_theta(g, r, theta) };
    let nf = n as f64;
    let mut eigvec = DVector::from_fn(n, |k, _| {
        let sign = match branch {
            Branch::Odd if k % 2 == 1 => -1.0,
            _ => 1.0,
        };
        sign * (theta * (nf - 2.0 * k as f64 - 1.0) / 2.0).cos()
    });
    eigvec /= eigvec.norm();
    fix_central_sign(&mut eigvec);
    Ok(MinVarianceSolution {
        theta_sol: Some(theta),
        sigma2,
        eigvec,
    })
}

/// Smallest eigenpair of `V⁻` from a dense symmetric eigensolver.
pub fn min_variance_direct(v: &PulseCovariance) -> Result<MinVarianceSolution> {
    let n = v.n;
    if n > MAX_DIRECT_N {
        return Err(SpopoError::invalid("N", format!("dense solve limited to {MAX_DIRECT_N}")));
    }
    let eig = SymmetricEigen::new(v.v_minus.clone());
    let (imin, &sigma2) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| SpopoError::NumericalFailure("empty eigen decomposition".into()))?;
    if !sigma2.is_finite() {
        return Err(SpopoError::NumericalFailure("non-finite eigenvalue".into()));
    }
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let degenerate = eig
        .eigenvalues
        .iter()
        .enumerate()
        .any(|(i, &l)| i != imin && (l - sigma2).abs() <= 1e-12 * scale);
    let mut eigvec = if degenerate {
        let mut e = DVector::zeros(n);
        e[0] = 1.0;
        e
    } else {
        eig.eigenvectors.column(imin).into_owned()
    };
    if !degenerate {
        fix_central_sign(&mut eigvec);
    }
    Ok(MinVarianceSolution {
        theta_sol: None,
        sigma2,
        eigvec,
    })
}

/// `Var(x_j − x_k) + Var(p_j + p_k)`; values below 2 certify entanglement.
pub fn duan_sum(v: &PulseCovariance, j: usize, k: usize) -> Result<f64> {
    for idx in [j, k] {
        if idx >= v.n {
            return Err(SpopoError::IndexOutOfRange { index: idx, limit: v.n });
        }
    }
    if j == k {
        return Err(SpopoError::invalid("k", "pulse indices must differ"));
    }
    let (p, m) = (&v.v_plus, &v.v_minus);
    Ok(p[(j, j)] + p[(k, k)] - 2.0 * p[(j, k)] + m[(j, j)] + m[(k, k)] + 2.0 * m[(j, k)])
}
