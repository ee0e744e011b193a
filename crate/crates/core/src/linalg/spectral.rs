use std::cmp::Ordering;

use nalgebra::linalg::{Schur, SymmetricEigen};
use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::norms::op_norm;
use crate::error::{Error, Result};

const SCHUR_MAX_ITERATIONS: usize = 10_000;

/// Unitary diagonalization of a normal matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Columns are the eigenvectors, in the same order as `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// V · diag(f(λ)) · V†.
    pub fn apply(&self, mut f: impl FnMut(Complex64) -> Complex64) -> ComplexMatrix {
        let mapped: Vec<_> = self.eigenvalues.iter().map(|&z| f(z)).collect();
        let d = ComplexMatrix::diag(&mapped);
        &(&self.eigenvectors * &d) * &self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|z| z)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }
}

/// ‖MM† − M†M‖_op.
pub fn commutator_norm(m: &ComplexMatrix) -> Result<f64> {
    m.require_square("normality check")?;
    let adj = m.adjoint();
    op_norm(&(&(m * &adj) - &(&adj * m)))
}

/// True iff ‖MM† − M†M‖_op ≤ tol·‖M‖²_op.
pub fn is_normal(m: &ComplexMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let norm = match op_norm(m) {
        Ok(n) => n,
        Err(_) => return false,
    };
    if norm == 0.0 {
        return true;
    }
    commutator_norm(m).map(|c| c <= tol * norm * norm).unwrap_or(false)
}

/// ‖M − M†‖_op ≤ tol·‖M‖_op.
pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let norm = op_norm(m).unwrap_or(f64::INFINITY);
    let skew = op_norm(&(m - &m.adjoint())).unwrap_or(f64::INFINITY);
    skew <= tol * norm
}

/// Hermitian within tol and smallest eigenvalue ≥ −tol·max(1, trace).
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    if !is_hermitian(m, tol) {
        return false;
    }
    let (values, _) = hermitian_eigen(m);
    let trace = m.trace().re;
    values[0] >= -tol * trace.max(1.0)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(m.hermitian_part().into_dmatrix());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = nalgebra::DMatrix::from_fn(m.rows(), m.rows(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, ComplexMatrix::wrap(vectors))
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let decomposition = Schur::try_new(m.as_dmatrix().clone(), f64::EPSILON, SCHUR_MAX_ITERATIONS)
        .ok_or_else(|| Error::InvalidInput("Schur iteration did not converge".into()))?;
    let (q, t) = decomposition.unpack();
    Ok((ComplexMatrix::wrap(q), ComplexMatrix::wrap(t)))
}

/// Eigenvalues of an arbitrary square matrix, read off its complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    m.require_square("eigenvalue computation")?;
    let (_, t) = schur(m)?;
    Ok(t.diagonal())
}

pub fn spectral_radius(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn descending(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

/// Unitary diagonalization of a normal matrix through its Schur form.
///
/// Eigenvalues are ordered by real part, then imaginary part, both descending.
pub fn eig_normal(m: &ComplexMatrix, tol: f64) -> Result<Spectrum> {
    let n = m.require_square("eigendecomposition")?;
    if !is_normal(m, tol) {
        return Err(Error::NotNormal { commutator: commutator_norm(m)? });
    }
    let (q, t) = schur(m)?;
    // normal ⇒ Schur form is diagonal
    let norm = op_norm(m)?;
    let off_diagonal =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| t[(i, j)].norm_sqr()).sum::<f64>().sqrt();
    let limit = (tol * n as f64).sqrt() * norm;
    if off_diagonal > limit {
        return Err(Error::NotNormal { commutator: commutator_norm(m)? });
    }
    let diag = t.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| descending(&diag[a], &diag[b]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| q[(r, order[c])])?;
    Ok(Spectrum { eigenvalues, eigenvectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_spectrum_is_trivial() {
        let s = eig_normal(&ComplexMatrix::diag_real(&[2.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.eigenvalues, vec![c(2.0, 0.0), c(1.0, 0.0)]);
        let dev = &s.eigenvectors.map(|z| c(z.norm(), 0.0)) - &ComplexMatrix::identity(2);
        assert!(dev.max_abs() < 1e-12);
    }

    #[test]
    fn rotation_generator_has_imaginary_pair() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
        let s = eig_normal(&m, DEFAULT_TOL).unwrap();
        // characteristic polynomial λ² + 1
        assert!((s.eigenvalues[0] - c(0.0, 1.0)).norm() < 1e-12);
        assert!((s.eigenvalues[1] - c(0.0, -1.0)).norm() < 1e-12);
        let gram = &s.eigenvectors.adjoint() * &s.eigenvectors;
        assert!((&gram - &ComplexMatrix::identity(2)).max_abs() < 1e-12);
        assert!((&s.reconstruct() - &m).max_abs() < 1e-12);
    }

    #[test]
    fn rejects_non_normal() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(!is_normal(&m, DEFAULT_TOL));
        match eig_normal(&m, DEFAULT_TOL) {
            Err(Error::NotNormal { commutator }) => assert!((commutator - 1.0).abs() < 1e-12),
            other => panic!("expected not-normal, got {other:?}"),
        }
    }

    #[test]
    fn zero_matrix_is_normal() {
        assert!(is_normal(&ComplexMatrix::zeros(3, 3), DEFAULT_TOL));
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&ComplexMatrix::identity(3).scale(1.0 / 3.0), DEFAULT_TOL));
        assert!(!is_psd(&ComplexMatrix::diag_real(&[1.0, -0.5]), DEFAULT_TOL));
        let not_hermitian = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(!is_psd(&not_hermitian, DEFAULT_TOL));
    }

    #[test]
    fn general_eigenvalues_of_triangular() {
        let m = ComplexMatrix::from_real(2, 2, &[0.5, 3.0, 0.0, -0.25]).unwrap();
        let mut ev: Vec<f64> = eigenvalues(&m).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 0.25).abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
        assert!((spectral_radius(&m).unwrap() - 0.5).abs() < 1e-12);
    }
}
