use super::density::DensityMatrix;
use super::matrix::ComplexMatrix;
use super::spectral::hermitian_eigenvalues;
use crate::error::{Error, Result};

fn require_finite(m: &ComplexMatrix) -> Result<()> {
    if m.as_dmatrix().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> Result<f64> {
    require_finite(m)?;
    if m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    Ok(m.as_dmatrix().singular_values().iter().copied().fold(0.0, f64::max))
}

/// Sum of singular values of a square matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    m.require_square("trace norm")?;
    require_finite(m)?;
    if m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    Ok(m.as_dmatrix().singular_values().iter().sum())
}

/// Trace norm of a Hermitian matrix via its eigenvalues.
pub fn hermitian_trace_norm(m: &ComplexMatrix) -> Result<f64> {
    m.require_square("trace norm")?;
    require_finite(m)?;
    Ok(hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum())
}

/// ½‖ρ − σ‖₁.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.matrix().require_same_shape(sigma.matrix(), "trace distance")?;
    let diff = rho.matrix() - sigma.matrix();
    Ok((0.5 * hermitian_trace_norm(&diff)?).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn operator_norm_examples() {
        assert!((op_norm(&ComplexMatrix::diag_real(&[0.9, 0.4])).unwrap() - 0.9).abs() < 1e-14);
        assert_eq!(op_norm(&ComplexMatrix::zeros(2, 3)).unwrap(), 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap();
        assert!((op_norm(&hadamard).unwrap() - 1.0).abs() < 1e-14);
        let phase = ComplexMatrix::diag(&[Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)]);
        assert!((op_norm(&phase).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&ComplexMatrix::diag_real(&[0.7, -0.3])).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(trace_norm(&ComplexMatrix::zeros(2, 2)).unwrap(), 0.0);
        assert!(trace_norm(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn nilpotent_singular_values() {
        // [[0,2],[0,0]] = U Σ V† with U = I, Σ = diag(2, 0), V = swap
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
        let u = ComplexMatrix::identity(2);
        let sigma = ComplexMatrix::diag_real(&[2.0, 0.0]);
        let v = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((&(&(&u * &sigma) * &v.adjoint()) - &m).max_abs() < 1e-15);
        assert!((op_norm(&m).unwrap() - 2.0).abs() < 1e-14);
        assert!((trace_norm(&m).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        let a = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let b = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 0.2).abs() < 1e-14);
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        let zero = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let one = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
        let three = DensityMatrix::maximally_mixed(3);
        assert!(trace_distance(&a, &three).is_err());
    }
}
