//! Python bindings. Matrices cross the boundary as nested lists.

use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spopo_core::{cavity, metrology, pulses, supermodes, Branch, FrequencyGrid, JointKernel};

create_exception!(spopo, SpopoError, PyValueError);

fn err(e: spopo_core::SpopoError) -> PyErr {
    SpopoError::new_err(format!("{}: {e}", e.code()))
}

fn rows<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix<T: nalgebra::Scalar + Copy>(data: &[Vec<T>]) -> PyResult<DMatrix<T>> {
    let n = data.len();
    let m = data.first().map_or(0, |r| r.len());
    if data.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| data[i][j]))
}

fn branch(odd: bool) -> Branch {
    if odd {
        Branch::Odd
    } else {
        Branch::Even
    }
}

#[pyclass(name = "CavityConfig", frozen)]
struct PyCavity(cavity::CavityConfig);

#[pymethods]
impl PyCavity {
    #[new]
    #[pyo3(signature = (r, delta_rt = 0.0))]
    fn new(r: f64, delta_rt: f64) -> PyResult<Self> {
        cavity::CavityConfig::from_r(r, delta_rt).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (finesse, delta_rt = 0.0))]
    fn from_finesse(finesse: f64, delta_rt: f64) -> PyResult<Self> {
        cavity::CavityConfig::from_finesse(finesse, delta_rt).map(Self).map_err(err)
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.r
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }

    #[getter]
    fn delta_rt(&self) -> f64 {
        self.0.delta_rt
    }

    #[getter]
    fn finesse(&self) -> f64 {
        self.0.finesse()
    }

    fn __repr__(&self) -> String {
        format!("CavityConfig(r={}, delta_rt={})", self.0.r, self.0.delta_rt)
    }
}

/// Returns `(gain, branch)` with branch `"even"` or `"odd"`.
#[pyfunction]
#[pyo3(signature = (cavity, delta0 = 0.0))]
fn threshold_gain(cavity: &PyCavity, delta0: f64) -> PyResult<(f64, &'static str)> {
    let th = cavity::threshold_gain(&cavity.0, delta0).map_err(err)?;
    Ok((th.gain, if th.branch == Branch::Odd { "odd" } else { "even" }))
}

/// Bogoliubov pair `(C, S)` of the comb with shift `theta`.
#[pyfunction]
#[pyo3(signature = (gain, theta, cavity, delta0 = 0.0))]
fn comb_io(gain: f64, theta: f64, cavity: &PyCavity, delta0: f64) -> PyResult<(Complex64, Complex64)> {
    let t = cavity::comb_io(gain, theta, &cavity.0, delta0).map_err(err)?;
    Ok((t.c, t.s))
}

#[pyfunction]
#[pyo3(signature = (gain, theta, cavity, delta0 = 0.0))]
fn epr_pair_check(gain: f64, theta: f64, cavity: &PyCavity, delta0: f64) -> PyResult<f64> {
    cavity::epr_pair_check(gain, theta, &cavity.0, delta0).map_err(err)
}

#[pyclass(name = "PulseCovariance", frozen)]
struct PyPulseCovariance(pulses::PulseCovariance);

#[pymethods]
impl PyPulseCovariance {
    #[new]
    #[pyo3(signature = (gain, r, n, odd = false))]
    fn new(gain: f64, r: f64, n: usize, odd: bool) -> PyResult<Self> {
        pulses::PulseCovariance::with_branch(gain, r, n, branch(odd)).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn v_plus(&self) -> Vec<Vec<f64>> {
        rows(&self.0.v_plus)
    }

    #[getter]
    fn v_minus(&self) -> Vec<Vec<f64>> {
        rows(&self.0.v_minus)
    }

    fn duan_sum(&self, j: usize, k: usize) -> PyResult<f64> {
        pulses::duan_sum(&self.0, j, k).map_err(err)
    }
}

/// Smallest eigenpair of `V⁻(N)`; `method` is `"transcendental"` or `"direct"`.
#[pyfunction]
#[pyo3(signature = (gain, r, n, method = "transcendental", odd = false))]
fn min_variance<'py>(py: Python<'py>, gain: f64, r: f64, n: usize, method: &str, odd: bool) -> PyResult<Bound<'py, PyDict>> {
    let sol = match method {
        "transcendental" => pulses::min_variance_transcendental_branch(gain, r, n, branch(odd)),
        "direct" => pulses::PulseCovariance::with_branch(gain, r, n, branch(odd)).and_then(|v| pulses::min_variance_direct(&v)),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("sigma2", sol.sigma2)?;
    d.set_item("theta", sol.theta_sol)?;
    d.set_item("eigvec", sol.eigvec.as_slice().to_vec())?;
    Ok(d)
}

#[pyfunction]
fn sigma2_limit(gain: f64, r: f64) -> f64 {
    pulses::sigma2_limit(gain, r)
}

/// `F = 2 Σ_n α′_nᵀ [V⁻_n]⁻¹ α′_n`; `alpha_prime` has one row per mode.
#[pyfunction]
fn fisher_information(alpha_prime: Vec<Vec<f64>>, v_minus: Vec<Vec<Vec<f64>>>) -> PyResult<f64> {
    let a = matrix(&alpha_prime)?;
    let vs = v_minus.iter().map(|v| matrix(v)).collect::<PyResult<Vec<_>>>()?;
    let refs: Vec<Option<&DMatrix<f64>>> = vs.iter().map(Some).collect();
    metrology::fisher_information(&a, &refs).map_err(err)
}

#[pyfunction]
fn cramer_rao<'py>(py: Python<'py>, sigma2: f64, n: usize, n_bar0: f64, omega0: f64, d_omega0_sq: f64) -> PyResult<Bound<'py, PyDict>> {
    let res = metrology::cramer_rao(sigma2, n, n_bar0, omega0, d_omega0_sq).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("fisher", res.fisher)?;
    d.set_item("delta_tau", res.delta_tau)?;
    d.set_item("delta_tau_sql", res.delta_tau_sql)?;
    d.set_item("improvement", res.improvement)?;
    Ok(d)
}

/// Improvement versus pulse number, one dict per pump ratio.
#[pyfunction]
#[pyo3(signature = (cavity, ratios, n_max, delta0 = 0.0))]
fn improvement_curve<'py>(py: Python<'py>, cavity: &PyCavity, ratios: Vec<f64>, n_max: usize, delta0: f64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let curves = metrology::improvement_curve(&cavity.0, delta0, &ratios, n_max).map_err(err)?;
    curves
        .into_iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("ratio", c.ratio)?;
            d.set_item("gain", c.gain)?;
            d.set_item("sigma2", c.sigma2)?;
            d.set_item("improvement", c.improvement)?;
            d.set_item("asymptote", c.asymptote)?;
            d.set_item("min_pulses", c.min_pulses)?;
            Ok(d)
        })
        .collect()
}

/// Takagi factorization `A = W diag(σ) Wᵀ`; returns `(σ, W)`.
#[pyfunction]
fn takagi(matrix_rows: Vec<Vec<Complex64>>) -> PyResult<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let m = matrix(&matrix_rows)?;
    let (values, w) = supermodes::takagi(&m).map_err(err)?;
    Ok((values, rows(&w)))
}

/// Supermodes of a kernel sampled on the symmetric grid of `n_points` over
/// `[−omega_max, omega_max]`, quadrature weight included.
#[pyfunction]
#[pyo3(signature = (kernel, omega_max, gain_cutoff = supermodes::DEFAULT_GAIN_CUTOFF))]
fn schmidt_decompose<'py>(py: Python<'py>, kernel: Vec<Vec<Complex64>>, omega_max: f64, gain_cutoff: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = matrix(&kernel)?;
    let grid = FrequencyGrid::new(m.nrows(), omega_max).map_err(err)?;
    let basis = supermodes::schmidt_decompose(&JointKernel { matrix: m, grid }, gain_cutoff).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("gains", basis.gains.clone())?;
    d.set_item("n_kept", basis.n_kept)?;
    d.set_item("omega", grid.omegas())?;
    d.set_item("modes_freq", rows(&basis.modes_freq))?;
    d.set_item("orthonormality_error", basis.orthonormality_error())?;
    Ok(d)
}

#[pymodule]
fn spopo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SpopoError", m.py().get_type::<SpopoError>())?;
    m.add_class::<PyCavity>()?;
    m.add_class::<PyPulseCovariance>()?;
    m.add_function(wrap_pyfunction!(threshold_gain, m)?)?;
    m.add_function(wrap_pyfunction!(comb_io, m)?)?;
    m.add_function(wrap_pyfunction!(epr_pair_check, m)?)?;
    m.add_function(wrap_pyfunction!(min_variance, m)?)?;
    m.add_function(wrap_pyfunction!(sigma2_limit, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_information, m)?)?;
    m.add_function(wrap_pyfunction!(cramer_rao, m)?)?;
    m.add_function(wrap_pyfunction!(improvement_curve, m)?)?;
    m.add_function(wrap_pyfunction!(takagi, m)?)?;
    m.add_function(wrap_pyfunction!(schmidt_decompose, m)?)?;
    Ok(())
}
