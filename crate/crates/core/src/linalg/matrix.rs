use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix. Entries are always finite.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Wraps an nalgebra matrix, rejecting NaN and infinite entries.
    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::InvalidInput("matrix must have at least one row and column".into()));
        }
        if let Some(bad) = inner.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite matrix entry {bad}")));
        }
        Ok(Self(inner))
    }

    pub(crate) fn wrap(inner: DMatrix<Complex64>) -> Self {
        Self(inner)
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::InvalidInput(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Real-valued convenience constructor, entries row by row.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let entries: Vec<_> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_row_slice(rows, cols, &entries)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { Complex64::new(0.0, 0.0) }))
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let entries: Vec<_> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diag(&entries)
    }

    /// Column vector.
    pub fn column(entries: &[Complex64]) -> Self {
        Self(DMatrix::from_column_slice(entries.len(), 1, entries))
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self(DMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj()))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * Complex64::new(factor, 0.0))
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.0.diagonal().iter().copied().collect()
    }

    pub fn column_vec(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    /// Stacks columns into a single vector of length rows·cols.
    pub fn vectorize(&self) -> Vec<Complex64> {
        self.0.as_slice().to_vec()
    }

    /// Inverse of [`vectorize`](Self::vectorize).
    pub fn unvectorize(rows: usize, cols: usize, v: &[Complex64]) -> Result<Self> {
        if v.len() != rows * cols {
            return Err(Error::InvalidInput(format!("cannot reshape {} entries into {rows}x{cols}", v.len())));
        }
        Self::from_dmatrix(DMatrix::from_column_slice(rows, cols, v))
    }

    pub fn map(&self, f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self(self.0.map(f))
    }

    /// Square matrix product with a shape check.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::InvalidInput(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::InvalidInput(format!("{what} must be square, got {}x{}", self.rows(), self.cols())))
        }
    }

    pub(crate) fn require_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows() == other.rows() && self.cols() == other.cols() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "{what}: dimension mismatch {}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )))
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.0[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a shape mismatch, like nalgebra; use [`ComplexMatrix::try_mul`] otherwise.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_entries() {
        assert!(ComplexMatrix::from_real(1, 2, &[1.0, f64::NAN]).is_err());
        assert!(ComplexMatrix::from_real(1, 1, &[f64::INFINITY]).is_err());
        assert!(ComplexMatrix::from_real(2, 2, &[1.0; 3]).is_err());
    }

    #[test]
    fn vectorize_stacks_columns() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let v: Vec<f64> = m.vectorize().iter().map(|z| z.re).collect();
        assert_eq!(v, vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(ComplexMatrix::unvectorize(2, 2, &m.vectorize()).unwrap(), m);
    }
}
