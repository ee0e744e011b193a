use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::spectral::{eig_normal, hermitian_eigen, is_hermitian, is_normal};
use super::DEFAULT_TOL;
use crate::error::{Error, Result};

const TAYLOR_TERMS: usize = 24;

/// Matrix exponential.
///
/// Normal input goes through the unitary eigendecomposition; anything else
/// through scaling and squaring of a truncated Taylor series.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.require_square("matrix exponential")?;
    if is_normal(m, DEFAULT_TOL) {
        if let Ok(spectrum) = eig_normal(m, DEFAULT_TOL) {
            return Ok(spectrum.apply(|z| z.exp()));
        }
    }
    Ok(expm_series(m))
}

/// Scaling and squaring: exp(M) = exp(M/2^s)^(2^s) with ‖M/2^s‖ ≤ ½.
pub(crate) fn expm_series(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let norm = m.frobenius_norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = m.scale(0.5f64.powi(squarings));
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=TAYLOR_TERMS {
        term = (&term * &scaled).scale(1.0 / k as f64);
        result = &result + &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in [−tol·max(1, trace), 0) are treated as rounding noise and
/// clamped to zero; anything more negative is rejected.
pub fn sqrtm_psd(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    m.require_square("matrix square root")?;
    if !is_hermitian(m, tol) {
        return Err(Error::InvalidInput("square root needs a Hermitian matrix".into()));
    }
    let (values, vectors) = hermitian_eigen(m);
    let slack = tol * m.trace().re.max(1.0);
    if values[0] < -slack {
        return Err(Error::InvalidInput(format!(
            "square root needs a PSD matrix, smallest eigenvalue is {:.3e}",
            values[0]
        )));
    }
    let roots: Vec<_> = values.iter().map(|&x| Complex64::new(x.max(0.0).sqrt(), 0.0)).collect();
    let root = &(&vectors * &ComplexMatrix::diag(&roots)) * &vectors.adjoint();
    Ok(root.hermitian_part())
}

/// Ratio of the extreme eigenvalues of a Hermitian positive definite matrix.
pub fn condition_number_pd(a: &ComplexMatrix, tol: f64) -> Result<f64> {
    a.require_square("condition number")?;
    if !is_hermitian(a, tol) {
        return Err(Error::InvalidInput("condition number needs a Hermitian matrix".into()));
    }
    let (values, _) = hermitian_eigen(a);
    let (min, max) = (values[0], values[values.len() - 1]);
    let trace = a.trace().re;
    if !(min > tol * trace) {
        return Err(Error::InvalidInput(format!("matrix is not positive definite: smallest eigenvalue {min:.3e}")));
    }
    Ok((max / min).max(1.0))
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::wrap(a.as_dmatrix().kronecker(b.as_dmatrix()))
}

/// Solves A·x = b by LU factorization; `None` when A is singular.
pub fn solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<Option<Vec<Complex64>>> {
    let n = a.require_square("linear solve")?;
    if b.len() != n {
        return Err(Error::InvalidInput(format!("right-hand side has length {}, expected {n}", b.len())));
    }
    let rhs = nalgebra::DVector::from_column_slice(b);
    Ok(a.as_dmatrix().clone().lu().solve(&rhs).map(|x| x.iter().copied().collect()))
}

/// Inverse by LU factorization; `None` when A is singular.
pub fn inverse(a: &ComplexMatrix) -> Result<Option<ComplexMatrix>> {
    a.require_square("inverse")?;
    Ok(a.as_dmatrix().clone().try_inverse().map(ComplexMatrix::wrap))
}
