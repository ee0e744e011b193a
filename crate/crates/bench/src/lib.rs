//! Benchmark fixtures shared by the criterion targets.

use plyap_core::ensembles::{self, seeded};
use plyap_core::problems::discrete_setup;
use plyap_core::{ComplexMatrix, ProblemInstance, SetupOptions};

/// A seeded discrete instance of dimension `n` with ‖A‖ = 0.9.
pub fn discrete_instance(n: usize, epsilon: f64) -> (ComplexMatrix, ComplexMatrix, ProblemInstance) {
    let mut rng = seeded(n as u64);
    let a = ensembles::normal_with_norm(&mut rng, n, 0.9);
    let b = ensembles::density(&mut rng, n).into_matrix();
    let inst = discrete_setup(&a, &b, epsilon, &SetupOptions::default()).expect("valid benchmark instance");
    (a, b, inst)
}
