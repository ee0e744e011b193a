//! Seeded random matrix ensembles used by the perturbation model, the
//! property suites and the acceptance sweeps.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Complex64, ComplexMatrix, DensityMatrix};

/// Deterministic generator for a given seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let entries: Vec<_> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_row_slice(rows, cols, &entries).expect("gaussian entries are finite")
}

/// Haar-distributed unitary from the phase-corrected QR of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let (q, r) = g.into_dmatrix().qr().unpack();
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    let q = ComplexMatrix::from_dmatrix(q).expect("unitary is finite");
    &q * &ComplexMatrix::diag(&phases)
}

/// U·diag(λ)·U† with Haar U.
pub fn normal_with_spectrum<R: Rng + ?Sized>(rng: &mut R, eigenvalues: &[Complex64]) -> ComplexMatrix {
    let u = random_unitary(rng, eigenvalues.len());
    &(&u * &ComplexMatrix::diag(eigenvalues)) * &u.adjoint()
}

/// Random normal matrix with operator norm exactly `norm`: one eigenvalue on
/// the circle of that radius, the others uniform in the disc.
pub fn normal_with_norm<R: Rng + ?Sized>(rng: &mut R, n: usize, norm: f64) -> ComplexMatrix {
    let eigenvalues: Vec<_> = (0..n)
        .map(|i| {
            let radius = if i == 0 { norm } else { norm * rng.random::<f64>().sqrt() };
            Complex64::from_polar(radius, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    normal_with_spectrum(rng, &eigenvalues)
}

/// Hermitian positive definite matrix with eigenvalues in [1, κ], both ends attained.
pub fn hermitian_pd<R: Rng + ?Sized>(rng: &mut R, n: usize, kappa: f64) -> ComplexMatrix {
    let eigenvalues: Vec<_> = (0..n)
        .map(|i| match i {
            0 => 1.0,
            1 => kappa,
            _ => rng.random_range(1.0..=kappa),
        })
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    normal_with_spectrum(rng, &eigenvalues).hermitian_part()
}

/// C·C† for a Ginibre C with `rank` columns.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
    let c = gaussian_matrix(rng, n, rank.max(1));
    (&c * &c.adjoint()).hermitian_part()
}

/// Random mixed state of random rank.
pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=n);
    DensityMatrix::normalize(psd(rng, n, rank), 1e-9).expect("Gram matrix is PSD")
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let v: Vec<_> = (0..n).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Random probability vector with strictly positive entries.
pub fn probability_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_normal, op_norm, DEFAULT_TOL};

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(1);
        let u = random_unitary(&mut rng, 5);
        assert!((&(&u.adjoint() * &u) - &ComplexMatrix::identity(5)).max_abs() < 1e-12);
    }

    #[test]
    fn normal_ensemble_hits_requested_norm() {
        let mut rng = seeded(2);
        let a = normal_with_norm(&mut rng, 4, 0.7);
        assert!(is_normal(&a, DEFAULT_TOL));
        assert!((op_norm(&a).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_draw() {
        let a = gaussian_matrix(&mut seeded(9), 3, 3);
        let b = gaussian_matrix(&mut seeded(9), 3, 3);
        assert_eq!(a, b);
    }
}
