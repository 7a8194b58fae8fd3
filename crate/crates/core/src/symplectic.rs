//! Bogoliubov blocks acting on annihilation/creation pairs and Gaussian
//! covariance propagation.
//!
//! Quadratures follow `x = (a + a†)/√2`, `p = i(a† − a)/√2`, so the vacuum
//! variance of either quadrature is 1/2.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Result, SpopoError};

/// Default tolerance for the symplectic condition.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// The block `R = [[C, S], [S*, C*]]` acting on `(a, a†)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePairTransform {
    pub c: Complex64,
    pub s: Complex64,
}

impl ModePairTransform {
    pub fn new(c: Complex64, s: Complex64) -> Self {
        Self { c, s }
    }

    pub fn identity() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Single-mode squeezer with real gain `g`: `C = cosh g`, `S = sinh g`.
    pub fn squeeze(g: f64) -> Self {
        Self::new(Complex64::new(g.cosh(), 0.0), Complex64::new(g.sinh(), 0.0))
    }

    /// Phase rotation `a -> e^{iφ} a`.
    pub fn rotation(phi: f64) -> Self {
        Self::new(Complex64::from_polar(1.0, phi), Complex64::new(0.0, 0.0))
    }

    /// `|C|² − |S|²`, equal to one for a symplectic block.
    pub fn determinant(&self) -> f64 {
        self.c.norm_sqr() - self.s.norm_sqr()
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.c, self.s, self.s.conj(), self.c.conj())
    }

    pub fn inverse(&self) -> Self {
        // σ1 R† σ1 for a block with unit determinant.
        let d = self.determinant();
        Self::new(self.c.conj() / d, -self.s / d)
    }

    /// Real 2×2 matrix acting on `(x, p)`.
    pub fn quadrature_matrix(&self) -> [[f64; 2]; 2] {
        let sum = self.c + self.s;
        let diff = self.c - self.s;
        [[sum.re, -diff.im], [sum.im, diff.re]]
    }
}

/// Quadrature covariance of `N` modes split into the x and p blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureCovariance {
    pub v_plus: DMatrix<f64>,
    pub v_minus: DMatrix<f64>,
}

impl QuadratureCovariance {
    pub fn vacuum(n: usize) -> Self {
        Self {
            v_plus: DMatrix::identity(n, n) * 0.5,
            v_minus: DMatrix::identity(n, n) * 0.5,
        }
    }

    pub fn dim(&self) -> usize {
        self.v_plus.nrows()
    }

    /// Checks symmetry, positive definiteness and the diagonal uncertainty
    /// product `V+[k][k]·V−[k][k] ≥ 1/4`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for (name, m) in [("v_plus", &self.v_plus), ("v_minus", &self.v_minus)] {
            if !m.is_square() || m.nrows() != self.dim() {
                return Err(SpopoError::invalid(name, "shape mismatch"));
            }
            let asym = (m - m.transpose()).amax();
            if asym > tol {
                return Err(SpopoError::invalid(name, format!("asymmetry {asym:e}")));
            }
            if m.clone().cholesky().is_none() {
                return Err(SpopoError::NotPositiveDefinite(name.to_string()));
            }
        }
        for k in 0..self.dim() {
            let product = self.v_plus[(k, k)] * self.v_minus[(k, k)];
            if product < 0.25 - tol {
                return Err(SpopoError::invalid(
                    "covariance",
                    format!("uncertainty product {product} < 1/4 at mode {k}"),
                ));
            }
        }
        Ok(())
    }
}

/// True iff `R⁻¹ = σ1 R† σ1` holds entrywise within `tol`.
///
/// For the `[[C, S], [S*, C*]]` block this is the statement `|C|² − |S|² = 1`;
/// the full matrix product is checked so that non-finite entries fail.
pub fn check_symplectic(t: &ModePairTransform, tol: f64) -> bool {
    if !(tol > 0.0) {
        return false;
    }
    let r = t.matrix();
    let sigma1 = Matrix2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-1.0, 0.0),
    );
    let product = sigma1 * r.adjoint() * sigma1 * r;
    let dev = (product - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    dev.is_finite() && dev <= tol && (t.determinant() - 1.0).abs() <= tol
}

/// Block product `T1·T2`.
pub fn compose(t1: &ModePairTransform, t2: &ModePairTransform) -> Result<ModePairTransform> {
    compose_with_tol(t1, t2, SYMPLECTIC_TOL)
}

pub fn compose_with_tol(
    t1: &ModePairTransform,
    t2: &ModePairTransform,
    tol: f64,
) -> Result<ModePairTransform> {
    for t in [t1, t2] {
        if !check_symplectic(t, tol) {
            return Err(SpopoError::NotSymplectic { det: t.determinant() });
        }
    }
    Ok(ModePairTransform::new(
        t1.c * t2.c + t1.s * t2.s.conj(),
        t1.c * t2.s + t1.s * t2.c.conj(),
    ))
}

/// Output quadrature moments `(var_x, var_p, cov_xp)` for vacuum input.
pub fn output_covariance(t: &ModePairTransform) -> (f64, f64, f64) {
    let m = t.quadrature_matrix();
    let var_x = 0.5 * (m[0][0] * m[0][0] + m[0][1] * m[0][1]);
    let var_p = 0.5 * (m[1][0] * m[1][0] + m[1][1] * m[1][1]);
    let cov = 0.5 * (m[0][0] * m[1][0] + m[0][1] * m[1][1]);
    (var_x, var_p, cov)
}

/// Covariance of `out = A a + B a†` for vacuum input, in the interleaved
/// ordering `(x_0, p_0, x_1, p_1, …)`.
pub fn bogoliubov_vacuum_covariance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..a.ncols() {
            let sum = a[(j, k)] + b[(j, k)];
            let diff = a[(j, k)] - b[(j, k)];
            real[(2 * j, 2 * k)] = sum.re;
            real[(2 * j, 2 * k + 1)] = -diff.im;
            real[(2 * j + 1, 2 * k)] = sum.im;
            real[(2 * j + 1, 2 * k + 1)] = diff.re;
        }
    }
    &real * real.transpose() * 0.5
}
