use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::norms::op_norm;
use super::spectral::hermitian_eigenvalues;
use super::DEFAULT_TOL;
use crate::error::{Error, Result};

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `m` at the default tolerance.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, DEFAULT_TOL)
    }

    /// Validates Hermiticity (relative to ‖m‖), positivity (relative to the
    /// trace) and unit trace, all at `tol`. The stored matrix is the
    /// Hermitian part of `m`.
    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidState(format!("density matrix must be square, got {}x{}", m.rows(), m.cols())));
        }
        let norm = op_norm(&m)?;
        let skew = op_norm(&(&m - &m.adjoint()))?;
        if skew > tol * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidState(format!("not Hermitian: ||M - M^†|| = {skew:.3e}")));
        }
        let matrix = m.hermitian_part();
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)[0];
        if min_eig < -tol * trace.max(1.0) {
            return Err(Error::InvalidState(format!("not positive semidefinite: smallest eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Divides a nonzero PSD matrix by its trace, then validates.
    pub fn normalize(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let trace = m.trace().re;
        if !(trace > 0.0) {
            return Err(Error::InvalidState(format!("cannot normalize matrix with trace {trace}")));
        }
        Self::with_tolerance(m.hermitian_part().scale(1.0 / trace), tol)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(n).scale(1.0 / n as f64) }
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diag_real(probabilities))
    }

    /// |ψ⟩⟨ψ| for a unit vector ψ.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(psi, psi))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}
