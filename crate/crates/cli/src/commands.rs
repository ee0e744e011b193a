use std::path::Path;

use plyap_core::channel::diamond_bound;
use plyap_core::estimators::{
    instance_normalization_estimate, matrix_element, observable_expectation, pure_overlap, solution_trace_estimate,
    swap_test_check,
};
use plyap_core::linalg::{op_norm, trace_distance};
use plyap_core::sampler::{empirical_state, expected_stopping_time, markov_tail_check, sample_with};
use plyap_core::{
    ComplexMatrix, Epsilons, Error, HardnessInstance, Observable, ProblemInstance, ProblemKind, SampleConfig,
    SetupOptions, Tolerances, UnitVector,
};

use crate::matrix_io::{parse_matrix, parse_vector, MatrixJson};
use crate::report::*;
use crate::{CliError, EstimateArgs, HardnessArgs, InstanceArgs, RobustnessArgs, SampleArgs, SolveArgs};

type CliResult<T> = Result<T, CliError>;

/// Acceptance level for the sampled output state.
const EMPIRICAL_DISTANCE: f64 = 0.02;
const SIGMAS: f64 = 3.0;
const MARKOV_FACTOR: f64 = 4.0;
const CIRCUIT_TOL: f64 = 1e-10;
const HARDNESS_SLACK: f64 = 1e-12;
const CROSS_CHECK_TOL: f64 = 1e-9;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    parse_matrix(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_vector(path: &Path) -> CliResult<Vec<plyap_core::Complex64>> {
    parse_vector(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn positive(name: &str, value: f64) -> CliResult<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {value}")))
    }
}

fn build_instance(args: &InstanceArgs) -> CliResult<ProblemInstance> {
    let lyapunov = matches!(args.kind, ProblemKind::DiscreteLyapunov | ProblemKind::ContinuousLyapunov);
    if lyapunov && args.matrix_b.is_none() {
        return Err(CliError::Usage(format!("--matrix-b is required for --kind {}", args.kind)));
    }
    if !lyapunov && args.matrix_b.is_some() {
        return Err(CliError::Usage(format!("--kind {} takes no --matrix-b", args.kind)));
    }
    if args.delta.is_some() && !args.kind.is_continuous() {
        return Err(CliError::Usage(format!("--delta only applies to continuous kinds, not {}", args.kind)));
    }
    let epsilons = if args.kind == ProblemKind::ContinuousLyapunov {
        positive("epsilon1", args.epsilon1)?;
        positive("epsilon2", args.epsilon2)?;
        Epsilons::Pair(args.epsilon1, args.epsilon2)
    } else {
        positive("epsilon", args.epsilon)?;
        Epsilons::Single(args.epsilon)
    };
    let a = load_matrix(&args.matrix_a)?;
    let b = args.matrix_b.as_deref().map(load_matrix).transpose()?;
    let mut tolerances = Tolerances::default();
    if let Some(tol) = args.tolerance {
        positive("tolerance", tol)?;
        tolerances = Tolerances { structure: tol, trace: tol };
    }
    let options = SetupOptions { horizon: args.horizon, delta: args.delta, tolerances };
    Ok(plyap_core::problems::setup(args.kind, &a, b.as_ref(), epsilons, &options)?)
}

fn exact_section(inst: &ProblemInstance, report: &mut RunReport) -> CliResult<()> {
    let expected = inst.expected_state()?;
    let oracle = inst.oracle()?;
    let distance = trace_distance(&expected.state, &oracle.normalized)?;
    let tau = expected_stopping_time(&inst.channel, &inst.rho0, &inst.schedule)?;
    report.checks.push(Check::at_most("trace-distance", inst.target_error(), distance));
    report.checks.push(Check::at_most("expected-stopping-time", inst.horizon as f64 + 1.0, tau));
    report.instance = Some(InstanceSummary::from(inst));
    report.exact = Some(ExactMetrics {
        trace_distance: distance,
        expected_stopping_time: tau,
        normalization: expected.normalization,
        solution_trace: oracle.trace,
        expected_state: MatrixJson::from(expected.state.matrix()),
        oracle_state: MatrixJson::from(oracle.normalized.matrix()),
    });
    Ok(())
}

fn monte_carlo_section(
    inst: &ProblemInstance,
    n_runs: u64,
    seed: u64,
    max_steps: Option<u64>,
    report: &mut RunReport,
) -> CliResult<()> {
    if n_runs == 0 {
        return Err(CliError::Usage("--trajectories must be at least 1".into()));
    }
    let config = SampleConfig { n_runs, master_seed: seed, max_steps };
    let stats = match sample_with(&inst.channel, &inst.rho0, &inst.schedule, &config) {
        Ok(stats) => stats,
        Err(Error::RunawayTrajectory { budget, restarts }) => {
            report.diagnostics.insert(
                "runaway-trajectory".into(),
                format!("a trajectory used its whole budget of {budget} steps after {restarts} restarts"),
            );
            report.checks.push(Check {
                name: "trajectory-step-budget".into(),
                bound: budget as f64,
                observed: budget as f64,
                pass: false,
            });
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };

    let exact = inst.expected_state()?;
    let empirical = empirical_state(&stats, &inst.channel, &inst.rho0)?;
    let distance = trace_distance(&empirical, &exact.state)?;
    report.checks.push(Check::at_most("empirical-trace-distance", EMPIRICAL_DISTANCE, distance));

    let n = stats.n_runs as f64;
    let worst_z = stats
        .fractions()
        .iter()
        .zip(&exact.weights)
        .map(|(f, w)| {
            let se = (w * (1.0 - w) / n).sqrt();
            if se > 0.0 {
                (f - w).abs() / se
            } else if f == w {
                0.0
            } else {
                f64::MAX
            }
        })
        .fold(0.0, f64::max);
    report.checks.push(Check::at_most("histogram-max-abs-z", SIGMAS, worst_z));

    let tau = expected_stopping_time(&inst.channel, &inst.rho0, &inst.schedule)?;
    let tau_se = stats.stopping_time_std_error();
    report.checks.push(Check::at_most(
        "mean-stopping-time-deviation",
        SIGMAS * tau_se,
        (stats.stopping_time_mean - tau).abs(),
    ));
    report.checks.push(Check::at_most("mean-stopping-time", inst.horizon as f64 + 1.0, stats.stopping_time_mean));

    let tail = markov_tail_check(&stats, MARKOV_FACTOR)?;
    report.checks.push(Check::at_most(
        "markov-tail-a4",
        tail.bound + SIGMAS * tail.standard_error,
        tail.empirical_fraction,
    ));

    let norm = instance_normalization_estimate(&stats, inst)?;
    report.checks.push(Check::at_most(
        "normalization-deviation",
        SIGMAS * norm.std_error,
        (norm.estimate - norm.exact).abs(),
    ));

    let trace_estimate = if inst.schedule.is_uniform() { Some(solution_trace_estimate(&norm, inst)?) } else { None };
    if let Some(estimate) = trace_estimate {
        let exact_trace = inst.oracle()?.trace;
        let bias = norm.relative_bias_bound.unwrap_or(0.0);
        report.checks.push(Check::at_most(
            "solution-trace-relative-error",
            bias + SIGMAS * norm.std_error / norm.estimate,
            (estimate - exact_trace).abs() / exact_trace,
        ));
    }

    report.monte_carlo = Some(MonteCarloMetrics {
        n_runs: stats.n_runs,
        seed,
        histogram: stats.histogram.clone(),
        restarts: stats.n_restarts,
        mean_stopping_time: stats.stopping_time_mean,
        stopping_time_std_error: tau_se,
        empirical_trace_distance: distance,
        markov_tail_fraction: tail.empirical_fraction,
        normalization_estimate: norm.estimate,
        normalization_std_error: norm.std_error,
        solution_trace_estimate: trace_estimate,
        relative_bias_bound: norm.relative_bias_bound,
    });
    Ok(())
}

pub fn solve(args: &SolveArgs) -> CliResult<RunReport> {
    let inst = build_instance(&args.instance)?;
    let mut report = RunReport::new("solve", args.instance.seed);
    exact_section(&inst, &mut report)?;
    if let Some(n) = args.trajectories {
        monte_carlo_section(&inst, n, args.instance.seed, args.max_steps, &mut report)?;
    }
    Ok(report)
}

pub fn sample(args: &SampleArgs) -> CliResult<RunReport> {
    let inst = build_instance(&args.instance)?;
    let mut report = RunReport::new("sample", args.instance.seed);
    exact_section(&inst, &mut report)?;
    monte_carlo_section(&inst, args.trajectories, args.instance.seed, args.max_steps, &mut report)?;
    Ok(report)
}

pub fn robustness(args: &RobustnessArgs) -> CliResult<RunReport> {
    if !(args.epsilon_be >= 0.0 && args.epsilon_be.is_finite()) {
        return Err(CliError::Usage(format!("--epsilon-be must be non-negative, got {}", args.epsilon_be)));
    }
    let inst = build_instance(&args.instance)?;
    let mut report = RunReport::new("robustness", args.instance.seed);
    exact_section(&inst, &mut report)?;

    let budget = inst.robustness_budget(args.epsilon_be);
    let (perturbed, note) = match budget {
        None => (inst.channel.clone(), Some("δ irrelevant: T = 0, the channel is never applied".to_string())),
        Some(_) if args.epsilon_be == 0.0 => (inst.channel.clone(), Some("ε_BE = 0: channel left exact".to_string())),
        Some(delta) => (inst.channel.perturb(delta, args.instance.seed)?, None),
    };
    let bound = diamond_bound(inst.channel.kraus(), perturbed.kraus())?;
    if let Some(delta) = budget {
        report.checks.push(Check::at_most("diamond-bound", delta, bound));
    }
    let total = inst.with_channel(perturbed)?.distance_to_oracle()?;
    report.checks.push(Check::at_most("total-trace-distance", inst.target_error() + args.epsilon_be, total));
    report.robustness = Some(RobustnessMetrics {
        epsilon_be: args.epsilon_be,
        delta_budget: budget,
        diamond_bound: bound,
        total_trace_distance: total,
        note,
    });
    Ok(report)
}

pub fn hardness(args: &HardnessArgs) -> CliResult<RunReport> {
    let h = HardnessInstance::new(args.lambda)?;
    let mut report = RunReport::new("hardness", crate::DEFAULT_SEED);
    let mut rows = Vec::with_capacity(args.t_max + 1);
    for t in 0..=args.t_max {
        let (exact, bound, simulated) = (h.exact_distance(t), h.lower_bound(t), h.simulated_distance(t)?);
        // the two sides coincide at T = 0, so rounding gets a tiny allowance
        report.checks.push(Check::at_least(format!("exact-at-least-bound-t{t}"), bound, exact, HARDNESS_SLACK));
        report.checks.push(Check::at_most(
            format!("closed-form-vs-simulated-t{t}"),
            CROSS_CHECK_TOL,
            (exact - simulated).abs(),
        ));
        rows.push(HardnessRow { horizon: t, exact, bound, simulated });
    }
    report.hardness = Some(HardnessTable { lambda: h.lambda, mu: h.mu(), nu: h.nu(), rows });
    Ok(report)
}

pub fn estimate(args: &EstimateArgs) -> CliResult<RunReport> {
    let inst = build_instance(&args.instance)?;
    let mut report = RunReport::new("estimate", args.instance.seed);
    exact_section(&inst, &mut report)?;
    let rho = inst.expected_state()?.state;
    let sigma = inst.oracle()?.normalized;
    let target = inst.target_error();
    let mut readout = Readout::default();

    if let Some(path) = &args.observable {
        let o = Observable::new(load_matrix(path)?)?;
        let (on_rho, on_sigma) = (observable_expectation(&rho, &o)?, observable_expectation(&sigma, &o)?);
        // |tr(O(ρ − σ))| ≤ ‖O‖·‖ρ − σ‖₁
        report.checks.push(Check::at_most(
            "observable-error",
            2.0 * op_norm(o.matrix())? * target,
            (on_rho - on_sigma).abs(),
        ));
        readout.observable_expectation = Some(on_rho);
        readout.observable_on_oracle = Some(on_sigma);
    }
    if let Some(path) = &args.psi {
        let psi = UnitVector::new(load_vector(path)?)?;
        let (on_rho, on_sigma) = (pure_overlap(&rho, &psi)?, pure_overlap(&sigma, &psi)?);
        let swap = swap_test_check(&rho, &psi)?;
        report.checks.push(Check::at_most("overlap-error", target, (on_rho - on_sigma).abs()));
        report.checks.push(Check::at_most("swap-test-circuit", CIRCUIT_TOL, swap.discrepancy()));
        readout.overlap = Some(on_rho);
        readout.overlap_on_oracle = Some(on_sigma);
        readout.swap_test_circuit = Some(swap.circuit);

        if let Some(path) = &args.phi {
            let phi = UnitVector::new(load_vector(path)?)?;
            let element = matrix_element(&rho, &phi, &psi)?;
            let exact = matrix_element(&sigma, &phi, &psi)?;
            report.checks.push(Check::at_most("hadamard-test-circuit", CIRCUIT_TOL, element.discrepancy()));
            report.checks.push(Check::at_most(
                "matrix-element-error",
                2.0 * target,
                (element.value - exact.value).norm(),
            ));
            readout.matrix_element_re = Some(element.value.re);
            readout.matrix_element_im = Some(element.value.im);
            readout.hadamard_test_re = Some(element.circuit_real);
            readout.hadamard_test_im = Some(element.circuit_imag);
        }
    }
    report.readout = Some(readout);
    if let Some(n) = args.trajectories {
        monte_carlo_section(&inst, n, args.instance.seed, None, &mut report)?;
    }
    Ok(report)
}
