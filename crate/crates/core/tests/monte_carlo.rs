use plyap_core::ensembles::{self, seeded};
use plyap_core::linalg::{op_norm, trace_distance};
use plyap_core::sampler::{
    empirical_state, expected_state, expected_stopping_time, markov_tail_check, mixture, sample, sample_with,
};
use plyap_core::{ComplexMatrix, DensityMatrix, Error, KrausChannel, ProbabilitySchedule, SampleConfig};
use rand::Rng;

const SWEEP_SEED: u64 = 0x1a2b_3c4d;

fn diag_instance() -> (KrausChannel, DensityMatrix) {
    (KrausChannel::new(ComplexMatrix::diag_real(&[0.8, 0.4])).unwrap(), DensityMatrix::maximally_mixed(2))
}

#[test]
fn histogram_matches_exact_weights() {
    let (ch, rho0) = diag_instance();
    let s = ProbabilitySchedule::uniform(5);
    let n = 100_000;
    let stats = sample(&ch, &rho0, &s, n, 7).unwrap();
    let exact = expected_state(&ch, &rho0, &s).unwrap();
    for (k, (f, w)) in stats.fractions().iter().zip(&exact.weights).enumerate() {
        let se = (w * (1.0 - w) / n as f64).sqrt();
        assert!((f - w).abs() <= 3.0 * se, "k = {k}: {f} vs {w}");
    }
    let empirical = empirical_state(&stats, &ch, &rho0).unwrap();
    assert!(trace_distance(&empirical, &exact.state).unwrap() <= 0.02);
}

#[test]
fn exact_weights_reproduce_expected_state() {
    let (ch, rho0) = diag_instance();
    let s = ProbabilitySchedule::uniform(9);
    let exact = expected_state(&ch, &rho0, &s).unwrap();
    let rebuilt = mixture(&ch, &rho0, &exact.weights).unwrap();
    assert!(trace_distance(&rebuilt, &exact.state).unwrap() <= 1e-12);
}

#[test]
fn trace_preserving_channels_never_restart() {
    let mut rng = seeded(3);
    let u = ensembles::random_unitary(&mut rng, 3);
    let ch = KrausChannel::new(u).unwrap();
    let rho0 = ensembles::density(&mut rng, 3);
    let stats = sample(&ch, &rho0, &ProbabilitySchedule::uniform(12), 20_000, 1).unwrap();
    assert_eq!(stats.n_restarts, 0);
}

#[test]
fn identity_stopping_time_is_half_horizon_plus_one() {
    let ch = KrausChannel::identity(2);
    let rho0 = DensityMatrix::maximally_mixed(2);
    let s = ProbabilitySchedule::uniform(6);
    let stats = sample(&ch, &rho0, &s, 50_000, 11).unwrap();
    let exact = expected_stopping_time(&ch, &rho0, &s).unwrap();
    assert!((exact - 4.0).abs() < 1e-12);
    assert!((stats.stopping_time_mean - exact).abs() <= 3.0 * stats.stopping_time_std_error());
}

#[test]
fn runaway_trajectories_surface_as_errors() {
    let zero = KrausChannel::new(ComplexMatrix::zeros(2, 2)).unwrap();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let config = SampleConfig { n_runs: 1000, master_seed: 2, max_steps: Some(3) };
    let err = sample_with(&zero, &rho0, &ProbabilitySchedule::uniform(3), &config).unwrap_err();
    assert!(matches!(err, Error::RunawayTrajectory { budget: 3, .. }));
    // reported error is independent of how work was split
    assert_eq!(err, sample_with(&zero, &rho0, &ProbabilitySchedule::uniform(3), &config).unwrap_err());
}

#[test]
fn sample_does_not_depend_on_thread_count() {
    let (ch, rho0) = diag_instance();
    let s = ProbabilitySchedule::uniform(8);
    let reference = sample(&ch, &rho0, &s, 30_000, 99).unwrap();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let stats = pool.install(|| sample(&ch, &rho0, &s, 30_000, 99).unwrap());
        assert_eq!(stats, reference);
    }
}

/// Random channels, initial states and coefficient schedules: the sampled
/// output state and stopping time agree with the closed forms.
#[test]
fn monte_carlo_sweep_agrees_with_closed_forms() {
    let mut rng = seeded(SWEEP_SEED);
    let n_runs = 100_000;
    for case in 0..50 {
        let n = rng.random_range(1..=4);
        let horizon = rng.random_range(0..=8);
        let m = if rng.random_bool(0.5) {
            let norm = rng.random_range(0.3..=1.0);
            ensembles::normal_with_norm(&mut rng, n, norm)
        } else {
            let g = ensembles::gaussian_matrix(&mut rng, n, n);
            let scale = rng.random_range(0.3..=1.0) / op_norm(&g).unwrap();
            g.scale(scale)
        };
        let ch = KrausChannel::new(m).unwrap();
        let rho0 = ensembles::density(&mut rng, n);
        let c = ensembles::probability_vector(&mut rng, horizon + 1);
        let s = ProbabilitySchedule::from_coefficients(&c).unwrap();

        let stats = sample(&ch, &rho0, &s, n_runs, SWEEP_SEED + case).unwrap();
        let exact = expected_state(&ch, &rho0, &s).unwrap();
        let distance = trace_distance(&empirical_state(&stats, &ch, &rho0).unwrap(), &exact.state).unwrap();
        assert!(distance <= 0.02, "case {case}: distance {distance}");

        let tau = expected_stopping_time(&ch, &rho0, &s).unwrap();
        let se = stats.stopping_time_std_error();
        assert!(
            (stats.stopping_time_mean - tau).abs() <= 3.0 * se,
            "case {case}: {} vs {tau}",
            stats.stopping_time_mean
        );

        let uniform = ProbabilitySchedule::uniform(horizon);
        assert!(expected_stopping_time(&ch, &rho0, &uniform).unwrap() <= horizon as f64 + 1.0 + 1e-10);

        let tail = markov_tail_check(&stats, 4.0).unwrap();
        assert!(tail.holds(3.0), "case {case}: {tail:?}");
    }
}
