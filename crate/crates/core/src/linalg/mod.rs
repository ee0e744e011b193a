//! Dense complex linear algebra at desk scale (N ≤ 64).
//!
//! Decompositions are delegated to nalgebra; everything here is a thin,
//! validated layer on top that the channel, sampler and oracle code share.

mod density;
mod functions;
mod matrix;
mod norms;
mod spectral;

pub use density::DensityMatrix;
pub use functions::{condition_number_pd, expm, inverse, kron, solve, sqrtm_psd};
pub use matrix::ComplexMatrix;
pub use norms::{hermitian_trace_norm, op_norm, trace_distance, trace_norm};
pub use spectral::{
    commutator_norm, eig_normal, eigenvalues, hermitian_eigen, hermitian_eigenvalues, is_hermitian, is_normal, is_psd,
    spectral_radius, Spectrum,
};

pub use num_complex::Complex64;

/// Default slack for normality, Hermiticity, positivity and trace checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Tolerances used when validating problem inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative slack for normality, Hermiticity and positivity.
    pub structure: f64,
    /// Absolute slack on tr(B) = 1 before renormalizing.
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { structure: DEFAULT_TOL, trace: DEFAULT_TOL }
    }
}
