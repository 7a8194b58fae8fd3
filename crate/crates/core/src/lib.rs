//! Quantum-optics model of a synchronously pumped optical parametric
//! oscillator: parametric down-conversion kernel, supermode decomposition,
//! cavity input-output map, pulse-train statistics and time-delay metrology.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod error;
pub mod kernel;
pub mod metrology;
pub mod pulses;
pub mod supermodes;
pub mod symplectic;

pub use cavity::{comb_io, epr_pair_check, squeezing_spectrum, threshold_gain, Branch, CavityConfig, SqueezingSpectrum, Threshold};
pub use error::{ErrorKind, Result, SpopoError};
pub use metrology::{cramer_rao, fisher_information, improvement_curve, omega_matrix, optimal_probe, MetrologyResult, ProbeField, TranslationGenerator};
pub use kernel::{build_kernel, CrystalConfig, Dispersion, EnvelopeShape, FrequencyGrid, JointKernel, PumpConfig};
pub use pulses::{quadrature_covariance, Quadrature, duan_sum, io_series_coefficients, min_variance_direct, min_variance_transcendental, MinVarianceSolution, PulseCovariance};
pub use supermodes::{schmidt_decompose, synthesize_comb, takagi, CombFunction, PulseTrain, SupermodeBasis};
pub use symplectic::{check_symplectic, compose, output_covariance, ModePairTransform, QuadratureCovariance};
