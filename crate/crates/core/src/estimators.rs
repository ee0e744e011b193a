//! Read-out of the output state: expectations, overlaps, matrix elements
//! and the restart-count estimate of the normalization constant.

use crate::channel::ChannelTraces;
use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, kron, op_norm, Complex64, ComplexMatrix, DensityMatrix, DEFAULT_TOL};
use crate::problems::{ProblemInstance, ProblemKind};
use crate::sampler::{normalization_from_traces, SampleStats};
use crate::schedule::ProbabilitySchedule;

/// Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable(ComplexMatrix);

impl Observable {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        m.require_square("observable")?;
        if !is_hermitian(&m, DEFAULT_TOL) {
            return Err(Error::InvalidInput("observable is not Hermitian".into()));
        }
        Ok(Self(m.hermitian_part()))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Vector of unit Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(Vec<Complex64>);

impl UnitVector {
    pub fn new(v: Vec<Complex64>) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if v.is_empty() || (norm - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidInput(format!("vector has norm {norm}, expected 1")));
        }
        Ok(Self(v))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

fn check_dim(rho: &DensityMatrix, n: usize, what: &str) -> Result<()> {
    if rho.dim() != n {
        return Err(Error::InvalidInput(format!("{what} has dimension {n}, state has {}", rho.dim())));
    }
    Ok(())
}

/// tr(ρO).
pub fn observable_expectation(rho: &DensityMatrix, o: &Observable) -> Result<f64> {
    check_dim(rho, o.matrix().rows(), "observable")?;
    let value = (rho.matrix() * o.matrix()).trace();
    debug_assert!(value.im.abs() <= 1e-10 * op_norm(o.matrix()).unwrap_or(1.0).max(1.0));
    Ok(value.re)
}

fn sandwich(phi: &[Complex64], m: &ComplexMatrix, psi: &[Complex64]) -> Complex64 {
    let n = phi.len();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| phi[i].conj() * m[(i, j)] * psi[j]).sum()
}

/// ⟨ψ|ρ|ψ⟩.
pub fn pure_overlap(rho: &DensityMatrix, psi: &UnitVector) -> Result<f64> {
    check_dim(rho, psi.dim(), "vector")?;
    Ok(sandwich(psi.as_slice(), rho.matrix(), psi.as_slice()).re.clamp(0.0, 1.0))
}

fn plus_state() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).expect("finite")
}

fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("finite")
}

fn pauli_y() -> ComplexMatrix {
    let i = Complex64::new(0.0, 1.0);
    ComplexMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), -i, i, Complex64::new(0.0, 0.0)]).expect("finite")
}

fn projector(bit: usize) -> ComplexMatrix {
    let mut d = [0.0, 0.0];
    d[bit] = 1.0;
    ComplexMatrix::diag_real(&d)
}

/// |0⟩⟨0| ⊗ W₀ + |1⟩⟨1| ⊗ W₁.
fn controlled(w0: &ComplexMatrix, w1: &ComplexMatrix) -> ComplexMatrix {
    &kron(&projector(0), w0) + &kron(&projector(1), w1)
}

/// Swap of two N-dimensional registers.
fn swap_operator(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n * n, n * n, |row, col| {
        let (i, j) = (col / n, col % n);
        Complex64::new(if row == j * n + i { 1.0 } else { 0.0 }, 0.0)
    })
    .expect("finite")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitCheck {
    /// Trace of the measured observable on the simulated circuit output.
    pub circuit: f64,
    /// The value the identity says it equals.
    pub algebraic: f64,
}

impl CircuitCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.circuit - self.algebraic).abs()
    }
}

/// Evaluates tr[(σ_X ⊗ I ⊗ I)·C_S·(|+⟩⟨+| ⊗ ρ ⊗ |ψ⟩⟨ψ|)·C_S†] with an explicit controlled swap.
pub fn swap_test_check(rho: &DensityMatrix, psi: &UnitVector) -> Result<CircuitCheck> {
    let n = psi.dim();
    check_dim(rho, n, "vector")?;
    let id = ComplexMatrix::identity(n * n);
    let c_swap = controlled(&id, &swap_operator(n));
    let sigma = ComplexMatrix::outer(psi.as_slice(), psi.as_slice());
    let input = kron(&plus_state(), &kron(rho.matrix(), &sigma));
    let output = &(&c_swap * &input) * &c_swap.adjoint();
    let measured = kron(&pauli_x(), &id);
    Ok(CircuitCheck { circuit: (&measured * &output).trace().re, algebraic: pure_overlap(rho, psi)? })
}

/// Unitary whose first column is `v`; the rest is a Gram–Schmidt completion
/// over the canonical basis, taken in order.
pub fn complete_unitary(v: &UnitVector) -> ComplexMatrix {
    let n = v.dim();
    let mut columns: Vec<Vec<Complex64>> = vec![v.as_slice().to_vec()];
    for k in 0..n {
        if columns.len() == n {
            break;
        }
        let mut candidate = vec![Complex64::new(0.0, 0.0); n];
        candidate[k] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for col in &columns {
                let overlap: Complex64 = col.iter().zip(&candidate).map(|(c, x)| c.conj() * x).sum();
                for (x, c) in candidate.iter_mut().zip(col) {
                    *x -= overlap * c;
                }
            }
        }
        let norm = candidate.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            columns.push(candidate.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| columns[j][i]).expect("finite")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixElement {
    /// ⟨φ|ρ|ψ⟩.
    pub value: Complex64,
    /// Hadamard-test circuit with σ_X readout, equal to Re⟨φ|ρ|ψ⟩.
    pub circuit_real: f64,
    /// Hadamard-test circuit with σ_Y readout, equal to Im⟨φ|ρ|ψ⟩.
    pub circuit_imag: f64,
}

impl MatrixElement {
    pub fn discrepancy(&self) -> f64 {
        (self.circuit_real - self.value.re).abs().max((self.circuit_imag - self.value.im).abs())
    }
}

/// ⟨φ|ρ|ψ⟩, alongside its Hadamard-test circuit evaluation.
///
/// With U|0⟩ = ψ and V|0⟩ = φ the circuit applies U† on control 0 and V†
/// on control 1 to |+⟩⟨+| ⊗ ρ and measures σ ⊗ |0⟩⟨0|.
pub fn matrix_element(rho: &DensityMatrix, phi: &UnitVector, psi: &UnitVector) -> Result<MatrixElement> {
    let n = psi.dim();
    check_dim(rho, n, "vector")?;
    check_dim(rho, phi.dim(), "vector")?;
    let value = sandwich(phi.as_slice(), rho.matrix(), psi.as_slice());
    let u = complete_unitary(psi);
    let v = complete_unitary(phi);
    let gate = controlled(&u.adjoint(), &v.adjoint());
    let output = &(&gate * &kron(&plus_state(), rho.matrix())) * &gate.adjoint();
    let read =
        |pauli: ComplexMatrix| (&kron(&pauli, &ComplexMatrix::outer(&basis(n, 0), &basis(n, 0))) * &output).trace().re;
    Ok(MatrixElement { value, circuit_real: read(pauli_x()), circuit_imag: read(pauli_y()) })
}

fn basis(n: usize, k: usize) -> Vec<Complex64> {
    (0..n).map(|i| Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationEstimate {
    /// n_runs / (n_runs + n_restarts).
    pub estimate: f64,
    /// Σ r_k R_k t_k.
    pub exact: f64,
    pub std_error: f64,
    /// Bernoulli trials behind the estimate (every pass from counter 0).
    pub trials: u64,
    /// Bound on the relative gap between (T+1)·exact, scaled to the
    /// solution, and the true tr(X).
    pub relative_bias_bound: Option<f64>,
}

impl NormalizationEstimate {
    pub fn within(&self, sigmas: f64) -> bool {
        (self.estimate - self.exact).abs() <= sigmas * self.std_error
    }
}

/// Each pass from counter 0 either stops (probability Σ r_k R_k t_k) or
/// restarts, so the stopping fraction over all passes estimates it.
pub fn normalization_estimate(
    stats: &SampleStats,
    schedule: &ProbabilitySchedule,
    traces: &ChannelTraces,
    relative_bias_bound: Option<f64>,
) -> Result<NormalizationEstimate> {
    if stats.horizon() != schedule.horizon() || traces.horizon() != schedule.horizon() {
        return Err(Error::InvalidInput("sample statistics, schedule and traces disagree on the horizon".into()));
    }
    let trials = stats.n_runs + stats.n_restarts;
    let estimate = stats.n_runs as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(NormalizationEstimate {
        estimate,
        exact: normalization_from_traces(traces, schedule),
        std_error,
        trials,
        relative_bias_bound,
    })
}

/// Relative bias of (T+1)·Σ r_k R_k t_k (times Δ for continuous kinds) as an
/// estimate of tr(X).
///
/// Discrete kinds drop the tail Σ_{k>T}, at most ‖M‖^{2(T+1)} of the total.
/// Continuous kinds add a left Riemann sum overshoot of at most
/// 2|min Re λ|Δ and a truncated tail of at most e^{−2|max Re λ|(T+1)Δ}.
pub fn relative_bias_bound(inst: &ProblemInstance) -> f64 {
    let t = inst.horizon as f64;
    match inst.delta {
        None => inst.channel.norm().powf(2.0 * (t + 1.0)),
        Some(delta) => {
            let (min_real, max_real) = inst.real_extremes;
            (2.0 * min_real.abs() * delta).max((-2.0 * max_real.abs() * (t + 1.0) * delta).exp())
        }
    }
}

/// Normalization estimate for a sample of `inst`.
pub fn instance_normalization_estimate(stats: &SampleStats, inst: &ProblemInstance) -> Result<NormalizationEstimate> {
    let traces = inst.channel.iterate_traces(&inst.rho0, inst.horizon)?;
    normalization_estimate(stats, &inst.schedule, &traces, Some(relative_bias_bound(inst)))
}

/// tr(X) of the Lyapunov solution from a normalization value under the uniform schedule.
pub fn lyapunov_trace_from_normalization(
    normalization: f64,
    kind: ProblemKind,
    horizon: usize,
    delta: Option<f64>,
) -> Result<f64> {
    let terms = (horizon + 1) as f64 * normalization;
    match (kind.is_continuous(), delta) {
        (false, _) => Ok(terms),
        (true, Some(d)) => Ok(d * terms),
        (true, None) => Err(Error::InvalidInput(format!("{kind} needs the step size to scale the trace"))),
    }
}

/// Estimate of tr(X) for the instance's exact solution (A⁻¹ for the inversion kinds).
pub fn solution_trace_estimate(est: &NormalizationEstimate, inst: &ProblemInstance) -> Result<f64> {
    if !inst.schedule.is_uniform() {
        return Err(Error::InvalidInput("trace read-out assumes the uniform schedule".into()));
    }
    let lyapunov = lyapunov_trace_from_normalization(est.estimate, inst.kind, inst.horizon, inst.delta)?;
    let n = inst.dim() as f64;
    Ok(match inst.kind {
        ProblemKind::DiscreteLyapunov | ProblemKind::ContinuousLyapunov => lyapunov,
        // X = ‖A‖·A⁻¹/N solves the discrete equation
        ProblemKind::InversionI => lyapunov * n / inst.norm_a,
        // X = A⁻¹/N solves the continuous equation with A' = −A/2
        ProblemKind::InversionII => lyapunov * n,
    })
}
