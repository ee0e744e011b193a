//! Lyapunov and matrix-inversion instances, their exact solutions, and the
//! slow-convergence instance showing the horizon cannot be shortened.

use std::fmt;
use std::str::FromStr;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    commutator_norm, condition_number_pd, eig_normal, eigenvalues, expm, hermitian_eigen, inverse, is_hermitian,
    is_normal, is_psd, kron, op_norm, solve, spectral_radius, sqrtm_psd, trace_distance, ComplexMatrix, DensityMatrix,
    Tolerances,
};
use crate::sampler::{expected_state, ExpectedState};
use crate::schedule::ProbabilitySchedule;

/// Margin below 1 (resp. 0) required of ‖A‖ (resp. max Re λ).
pub const STABILITY_MARGIN: f64 = 1e-12;

/// Relative residual accepted from the Lyapunov oracles.
pub const LYAPUNOV_RESIDUAL: f64 = 1e-8;

/// Residual accepted from the inverse oracle, per unit of κ.
pub const INVERSE_RESIDUAL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    DiscreteLyapunov,
    ContinuousLyapunov,
    InversionI,
    InversionII,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::DiscreteLyapunov,
        ProblemKind::ContinuousLyapunov,
        ProblemKind::InversionI,
        ProblemKind::InversionII,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ProblemKind::DiscreteLyapunov => "discrete",
            ProblemKind::ContinuousLyapunov => "continuous",
            ProblemKind::InversionI => "inversion-i",
            ProblemKind::InversionII => "inversion-ii",
        }
    }

    /// Whether the channel is a time step of a continuous evolution.
    pub fn is_continuous(self) -> bool {
        matches!(self, ProblemKind::ContinuousLyapunov | ProblemKind::InversionII)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown problem kind {s:?}")))
    }
}

/// Accuracy targets: a single ε, or (ε₁, ε₂) for discretization and truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Epsilons {
    Single(f64),
    Pair(f64, f64),
}

impl Epsilons {
    /// Bound on the trace distance of the expected state to the solution.
    pub fn total(self) -> f64 {
        match self {
            Epsilons::Single(e) => e,
            Epsilons::Pair(a, b) => a + b,
        }
    }
}

fn check_epsilon(name: &str, e: f64) -> Result<()> {
    if e > 0.0 && e < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must lie in (0, 1), got {e}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SetupOptions {
    /// Horizon to use instead of T*; must not be smaller.
    pub horizon: Option<usize>,
    /// Step size to use instead of Δ* (continuous kinds); must not be larger.
    pub delta: Option<f64>,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub channel: KrausChannel,
    pub rho0: DensityMatrix,
    pub horizon: usize,
    /// T* for the chosen parameters.
    pub required_horizon: usize,
    pub schedule: ProbabilitySchedule,
    /// Time step Δ (continuous kinds).
    pub delta: Option<f64>,
    pub epsilons: Epsilons,
    /// The matrix the caller supplied.
    pub source: ComplexMatrix,
    /// The A of the Lyapunov equation that is actually solved.
    pub lyapunov_a: ComplexMatrix,
    pub norm_a: f64,
    /// κ of the positive definite matrix involved, when there is one.
    pub condition_number: Option<f64>,
    /// (min Re λ, max Re λ) of the Lyapunov A.
    pub real_extremes: (f64, f64),
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.channel.dim()
    }

    pub fn expected_state(&self) -> Result<ExpectedState> {
        expected_state(&self.channel, &self.rho0, &self.schedule)
    }

    /// Exact solution of the problem the instance approximates.
    pub fn oracle(&self) -> Result<ExactSolution> {
        match self.kind {
            ProblemKind::DiscreteLyapunov => oracle_discrete(&self.lyapunov_a, self.rho0.matrix()),
            ProblemKind::ContinuousLyapunov => oracle_continuous(&self.lyapunov_a, self.rho0.matrix()),
            ProblemKind::InversionI | ProblemKind::InversionII => oracle_inverse(&self.source),
        }
    }

    /// ε, or ε₁ + ε₂.
    pub fn target_error(&self) -> f64 {
        self.epsilons.total()
    }

    /// δ budget for an approximate channel; `None` when the channel is never applied.
    pub fn robustness_budget(&self, eps_be: f64) -> Option<f64> {
        let t = self.horizon as f64;
        match self.delta {
            Some(delta) => Some(2.0 * eps_be / ((t + 1.0) * (t + 2.0) * delta * delta)),
            None if self.horizon == 0 => None,
            None => Some(2.0 * eps_be / (t * (t + 1.0))),
        }
    }

    /// Same instance with the channel replaced, e.g. by a perturbed one.
    pub fn with_channel(&self, channel: KrausChannel) -> Result<Self> {
        if channel.dim() != self.dim() {
            return Err(Error::InvalidInput("replacement channel has the wrong dimension".into()));
        }
        Ok(Self { channel, ..self.clone() })
    }

    /// Trace distance of the expected state to the normalized exact solution.
    pub fn distance_to_oracle(&self) -> Result<f64> {
        trace_distance(&self.expected_state()?.state, &self.oracle()?.normalized)
    }
}

fn require_normal(a: &ComplexMatrix, tol: f64) -> Result<()> {
    a.require_square("A")?;
    if is_normal(a, tol) {
        Ok(())
    } else {
        Err(Error::NotNormal { commutator: commutator_norm(a)? })
    }
}

/// B as a density matrix, renormalizing a trace within the tolerance of 1.
fn source_state(b: &ComplexMatrix, n: usize, tol: &Tolerances) -> Result<DensityMatrix> {
    if b.rows() != n || b.cols() != n {
        return Err(Error::InvalidState(format!("B is {}x{}, expected {n}x{n}", b.rows(), b.cols())));
    }
    let trace = b.trace().re;
    if (trace - 1.0).abs() > tol.trace {
        return Err(Error::InvalidState(format!("tr(B) = {trace}, expected 1")));
    }
    if !is_psd(b, tol.structure) {
        return Err(Error::InvalidState("B is not positive semidefinite".into()));
    }
    DensityMatrix::normalize(b.clone(), tol.structure.max(tol.trace) * 10.0)
}

fn resolve_horizon(required: usize, requested: Option<usize>) -> Result<usize> {
    match requested {
        Some(t) if t < required => Err(Error::InsufficientHorizon { requested: t, required }),
        Some(t) => Ok(t),
        None => Ok(required),
    }
}

/// T* = ⌈ln(1/ε) / (2 ln(1/‖A‖))⌉, or 0 when A = 0.
pub fn discrete_horizon(norm_a: f64, epsilon: f64) -> usize {
    if norm_a == 0.0 {
        return 0;
    }
    ((1.0 / epsilon).ln() / (2.0 * (1.0 / norm_a).ln())).ceil().max(0.0) as usize
}

/// Instance for A X A† − X + B = 0 with normal A, ‖A‖ < 1.
pub fn discrete_setup(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    epsilon: f64,
    options: &SetupOptions,
) -> Result<ProblemInstance> {
    check_epsilon("epsilon", epsilon)?;
    let tol = &options.tolerances;
    require_normal(a, tol.structure)?;
    let norm_a = op_norm(a)?;
    if norm_a >= 1.0 - STABILITY_MARGIN {
        return Err(Error::Unstable { norm: norm_a });
    }
    let rho0 = source_state(b, a.rows(), tol)?;
    let required = discrete_horizon(norm_a, epsilon);
    let horizon = resolve_horizon(required, options.horizon)?;
    let spectrum = eig_normal(a, tol.structure)?;
    Ok(ProblemInstance {
        kind: ProblemKind::DiscreteLyapunov,
        channel: KrausChannel::new(a.clone())?,
        rho0,
        horizon,
        required_horizon: required,
        schedule: ProbabilitySchedule::uniform(horizon),
        delta: None,
        epsilons: Epsilons::Single(epsilon),
        source: a.clone(),
        lyapunov_a: a.clone(),
        norm_a,
        condition_number: None,
        real_extremes: (spectrum.min_real(), spectrum.max_real()),
    })
}

/// Δ* and T* for a Hurwitz normal A.
///
/// `max_real` is the real part closest to zero, `min_real` the most negative.
pub fn continuous_parameters(norm_a: f64, min_real: f64, max_real: f64, eps1: f64, eps2: f64) -> (f64, usize) {
    let delta = (eps1 / norm_a) * (max_real / min_real);
    let horizon = ((1.0 / (2.0 * eps1)) * (1.0 / eps2).ln() * norm_a * min_real.abs() / max_real.powi(2)).ceil();
    (delta, horizon as usize)
}

/// Instance for A X + X A† + B = 0 with normal Hurwitz A.
pub fn continuous_setup(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    eps1: f64,
    eps2: f64,
    options: &SetupOptions,
) -> Result<ProblemInstance> {
    check_epsilon("epsilon1", eps1)?;
    check_epsilon("epsilon2", eps2)?;
    let tol = &options.tolerances;
    require_normal(a, tol.structure)?;
    let spectrum = eig_normal(a, tol.structure)?;
    let (min_real, max_real) = (spectrum.min_real(), spectrum.max_real());
    if max_real >= -STABILITY_MARGIN {
        return Err(Error::NotHurwitz { max_real });
    }
    let rho0 = source_state(b, a.rows(), tol)?;
    let norm_a = op_norm(a)?;
    let (delta_star, t_star) = continuous_parameters(norm_a, min_real, max_real, eps1, eps2);
    let (delta, required) = match options.delta {
        None => (delta_star, t_star),
        Some(d) if !(d > 0.0) || d > delta_star * (1.0 + 1e-12) => {
            return Err(Error::InvalidInput(format!("step {d} must lie in (0, {delta_star}]")));
        }
        Some(d) => {
            // a smaller step needs proportionally more terms to cover the same time span
            let span = ((1.0 / eps2).ln() / (2.0 * max_real.abs() * d)).ceil() as usize;
            (d, t_star.max(span))
        }
    };
    let horizon = resolve_horizon(required, options.horizon)?;
    let kraus = expm(&a.scale(delta))?;
    let condition_number = if is_hermitian(a, tol.structure) { Some(min_real / max_real) } else { None };
    Ok(ProblemInstance {
        kind: ProblemKind::ContinuousLyapunov,
        channel: KrausChannel::new(kraus)?,
        rho0,
        horizon,
        required_horizon: required,
        schedule: ProbabilitySchedule::uniform(horizon),
        delta: Some(delta),
        epsilons: Epsilons::Pair(eps1, eps2),
        source: a.clone(),
        lyapunov_a: a.clone(),
        norm_a,
        condition_number,
        real_extremes: (min_real, max_real),
    })
}

/// A⁻¹ through the discrete equation with M = √(I − A/‖A‖) and B = I/N.
pub fn inversion_i_setup(a: &ComplexMatrix, epsilon: f64, options: &SetupOptions) -> Result<ProblemInstance> {
    check_epsilon("epsilon", epsilon)?;
    let tol = &options.tolerances;
    let n = a.require_square("A")?;
    let kappa = condition_number_pd(a, tol.structure)?;
    let norm_a = op_norm(a)?;
    let shifted = &ComplexMatrix::identity(n) - &a.scale(1.0 / norm_a);
    let kraus = sqrtm_psd(&shifted.hermitian_part(), tol.structure)?;
    let required = (kappa * (1.0 / epsilon).ln()).ceil() as usize;
    let horizon = resolve_horizon(required, options.horizon)?;
    let (values, _) = hermitian_eigen(&kraus);
    Ok(ProblemInstance {
        kind: ProblemKind::InversionI,
        channel: KrausChannel::new(kraus.clone())?,
        rho0: DensityMatrix::maximally_mixed(n),
        horizon,
        required_horizon: required,
        schedule: ProbabilitySchedule::uniform(horizon),
        delta: None,
        epsilons: Epsilons::Single(epsilon),
        source: a.clone(),
        lyapunov_a: kraus,
        norm_a,
        condition_number: Some(kappa),
        real_extremes: (values[0], values[values.len() - 1]),
    })
}

/// A⁻¹ through the continuous equation with A' = −A/2 and ε₁ = ε₂ = ε/2.
pub fn inversion_ii_setup(a: &ComplexMatrix, epsilon: f64, options: &SetupOptions) -> Result<ProblemInstance> {
    check_epsilon("epsilon", epsilon)?;
    let tol = &options.tolerances;
    let n = a.require_square("A")?;
    let kappa = condition_number_pd(a, tol.structure)?;
    let generator = a.hermitian_part().scale(-0.5);
    let rho0 = DensityMatrix::maximally_mixed(n);
    let inner = continuous_setup(&generator, rho0.matrix(), epsilon / 2.0, epsilon / 2.0, options)?;
    Ok(ProblemInstance {
        kind: ProblemKind::InversionII,
        epsilons: Epsilons::Single(epsilon),
        source: a.clone(),
        norm_a: op_norm(a)?,
        condition_number: Some(kappa),
        ..inner
    })
}

/// Builds the instance for `kind` from the user-facing parameters.
pub fn setup(
    kind: ProblemKind,
    a: &ComplexMatrix,
    b: Option<&ComplexMatrix>,
    epsilons: Epsilons,
    options: &SetupOptions,
) -> Result<ProblemInstance> {
    let need_b = || b.ok_or_else(|| Error::InvalidInput(format!("{kind} needs a B matrix")));
    match (kind, epsilons) {
        (ProblemKind::DiscreteLyapunov, Epsilons::Single(e)) => discrete_setup(a, need_b()?, e, options),
        (ProblemKind::ContinuousLyapunov, Epsilons::Pair(e1, e2)) => continuous_setup(a, need_b()?, e1, e2, options),
        (ProblemKind::InversionI, Epsilons::Single(e)) => inversion_i_setup(a, e, options),
        (ProblemKind::InversionII, Epsilons::Single(e)) => inversion_ii_setup(a, e, options),
        (kind, eps) => Err(Error::InvalidInput(format!("{kind} does not take accuracy targets {eps:?}"))),
    }
}

/// Exact PSD solution X with its trace and normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub x: ComplexMatrix,
    pub trace: f64,
    pub normalized: DensityMatrix,
}

impl ExactSolution {
    fn new(x: ComplexMatrix) -> Result<Self> {
        let x = x.hermitian_part();
        let trace = x.trace().re;
        if !(trace > 0.0) || !is_psd(&x, 1e-8) {
            return Err(Error::IllConditioned { residual: trace, limit: 0.0 });
        }
        let normalized = DensityMatrix::normalize(x.clone(), 1e-8)?;
        Ok(Self { x, trace, normalized })
    }
}

/// ‖A X A† − X + B‖_op.
pub fn discrete_residual(a: &ComplexMatrix, x: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    op_norm(&(&(&(&(a * x) * &a.adjoint()) - x) + b))
}

/// ‖A X + X A† + B‖_op.
pub fn continuous_residual(a: &ComplexMatrix, x: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    op_norm(&(&(&(a * x) + &(x * &a.adjoint())) + b))
}

fn check_b(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    let n = a.require_square("A")?;
    a.require_same_shape(b, "Lyapunov equation")?;
    if !is_psd(b, 1e-10) {
        return Err(Error::InvalidState("B is not positive semidefinite".into()));
    }
    Ok(n)
}

fn solve_vectorized(system: &ComplexMatrix, rhs: &ComplexMatrix, n: usize) -> Result<Option<ComplexMatrix>> {
    match solve(system, &rhs.vectorize())? {
        Some(v) => Ok(Some(ComplexMatrix::unvectorize(n, n, &v)?)),
        None => Ok(None),
    }
}

fn check_residual(residual: f64, b: &ComplexMatrix) -> Result<()> {
    let limit = LYAPUNOV_RESIDUAL * op_norm(b)?;
    if residual > limit {
        return Err(Error::IllConditioned { residual, limit });
    }
    Ok(())
}

/// Solves A X A† − X + B = 0 via (I − conj(A) ⊗ A) vec X = vec B.
pub fn oracle_discrete(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ExactSolution> {
    let n = check_b(a, b)?;
    let radius = spectral_radius(a)?;
    if radius >= 1.0 {
        return Err(Error::Unstable { norm: radius });
    }
    let system = &ComplexMatrix::identity(n * n) - &kron(&a.conjugate(), a);
    let x = solve_vectorized(&system, b, n)?.ok_or(Error::Unstable { norm: radius })?;
    check_residual(discrete_residual(a, &x, b)?, b)?;
    ExactSolution::new(x)
}

/// Solves A X + X A† + B = 0 via (I ⊗ A + conj(A) ⊗ I) vec X = −vec B.
pub fn oracle_continuous(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ExactSolution> {
    let n = check_b(a, b)?;
    let lambda = eigenvalues(a)?;
    let scale = op_norm(a)?.max(f64::MIN_POSITIVE);
    let pair =
        lambda.iter().flat_map(|x| lambda.iter().map(move |y| (x + y.conj()).norm())).fold(f64::INFINITY, f64::min);
    if pair <= 1e-12 * scale {
        return Err(Error::SingularLyapunov { pair });
    }
    let max_real = lambda.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_real >= 0.0 {
        return Err(Error::NotHurwitz { max_real });
    }
    let id = ComplexMatrix::identity(n);
    let system = &kron(&id, a) + &kron(&a.conjugate(), &id);
    let x = solve_vectorized(&system, &-b, n)?.ok_or(Error::SingularLyapunov { pair })?;
    check_residual(continuous_residual(a, &x, b)?, b)?;
    ExactSolution::new(x)
}

/// X = A⁻¹ for Hermitian positive definite A.
pub fn oracle_inverse(a: &ComplexMatrix) -> Result<ExactSolution> {
    let n = a.require_square("A")?;
    let kappa = condition_number_pd(a, 1e-10)?;
    let x = inverse(a)?.ok_or_else(|| Error::InvalidInput("matrix is singular".into()))?;
    let residual = op_norm(&(&(a * &x) - &ComplexMatrix::identity(n)))?;
    let limit = INVERSE_RESIDUAL * kappa;
    if residual > limit {
        return Err(Error::IllConditioned { residual, limit });
    }
    ExactSolution::new(x)
}

/// Diagonal instance whose expected state converges no faster than λ^{4T}/10.
#[derive(Clone, Debug, PartialEq)]
pub struct HardnessInstance {
    pub lambda: f64,
    pub a: ComplexMatrix,
    pub b: DensityMatrix,
}

const HARDNESS_C: f64 = 1.5;

impl HardnessInstance {
    /// Requires λ ∈ [1/√2, 1).
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= std::f64::consts::FRAC_1_SQRT_2 && lambda < 1.0) {
            return Err(Error::InvalidInput(format!("lambda must lie in [1/sqrt(2), 1), got {lambda}")));
        }
        let mu = lambda * lambda;
        let nu = 1.0 - HARDNESS_C * (1.0 - mu);
        Ok(Self { lambda, a: ComplexMatrix::diag_real(&[mu.sqrt(), nu.sqrt()]), b: DensityMatrix::maximally_mixed(2) })
    }

    pub fn mu(&self) -> f64 {
        self.lambda * self.lambda
    }

    pub fn nu(&self) -> f64 {
        1.0 - HARDNESS_C * (1.0 - self.mu())
    }

    /// Closed-form trace distance after T steps.
    pub fn exact_distance(&self, horizon: usize) -> f64 {
        let c = HARDNESS_C;
        let delta = 1.0 - self.mu();
        let x = (1.0 - delta).powi(horizon as i32 + 1);
        let y = (1.0 - c * delta).powi(horizon as i32 + 1);
        c * (x - y) / ((c + 1.0) * (c + 1.0 - c * x - y))
    }

    pub fn lower_bound(&self, horizon: usize) -> f64 {
        self.lambda.powi(4 * horizon as i32) / 10.0
    }

    /// The same distance computed from the channel and the discrete oracle.
    pub fn simulated_distance(&self, horizon: usize) -> Result<f64> {
        let channel = KrausChannel::new(self.a.clone())?;
        let state = expected_state(&channel, &self.b, &ProbabilitySchedule::uniform(horizon))?.state;
        let exact = oracle_discrete(&self.a, self.b.matrix())?;
        trace_distance(&state, &exact.normalized)
    }
}
