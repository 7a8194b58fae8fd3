use thiserror::Error;

pub type Result<T> = std::result::Result<T, SpopoError>;

/// Broad class of a failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Physics,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpopoError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("transform is not symplectic: |C|^2 - |S|^2 = {det}")]
    NotSymplectic { det: f64 },

    #[error("kernel is not symmetric (max asymmetry {asymmetry:e})")]
    AsymmetricKernel { asymmetry: f64 },

    #[error("pump spectrum leaks out of the frequency window: edge/peak ratio {edge_ratio:e} exceeds {limit:e}")]
    SpectralLeakage { edge_ratio: f64, limit: f64 },

    #[error("input-output map is singular at or above threshold (theta = {theta})")]
    AtThreshold { theta: f64 },

    #[error("gain {gain} is at or above the oscillation threshold {threshold}")]
    AboveThreshold { gain: f64, threshold: f64 },

    #[error("no finite threshold: cos(delta_rt + delta0) vanishes (detuning {detuning})")]
    NoFiniteThreshold { detuning: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl SpopoError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        SpopoError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            SpopoError::InvalidParameter { .. } => "invalid_parameter",
            SpopoError::NotSymplectic { .. } => "not_symplectic",
            SpopoError::AsymmetricKernel { .. } => "asymmetric_kernel",
            SpopoError::SpectralLeakage { .. } => "spectral_leakage",
            SpopoError::AtThreshold { .. } => "at_threshold",
            SpopoError::AboveThreshold { .. } => "above_threshold",
            SpopoError::NoFiniteThreshold { .. } => "no_finite_threshold",
            SpopoError::NotPositiveDefinite(_) => "not_positive_definite",
            SpopoError::IndexOutOfRange { .. } => "index_out_of_range",
            SpopoError::GridMismatch(_) => "grid_mismatch",
            SpopoError::NumericalFailure(_) => "numerical_failure",
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            SpopoError::InvalidParameter { .. }
            | SpopoError::SpectralLeakage { .. }
            | SpopoError::IndexOutOfRange { .. }
            | SpopoError::GridMismatch(_) => ErrorKind::Config,
            SpopoError::AtThreshold { .. }
            | SpopoError::AboveThreshold { .. }
            | SpopoError::NoFiniteThreshold { .. } => ErrorKind::Physics,
            SpopoError::NotSymplectic { .. }
            | SpopoError::AsymmetricKernel { .. }
            | SpopoError::NotPositiveDefinite(_)
            | SpopoError::NumericalFailure(_) => ErrorKind::Numerical,
        }
    }
}
