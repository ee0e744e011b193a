//! Closed-form and Monte Carlo views of the stop/continue/restart process.
//!
//! A trajectory sits at counter i in the state ℰⁱ(ρ₀)/t_i. Each loop
//! iteration flips the stop coin r_i; on tails the channel is applied,
//! which succeeds with probability p_{i+1} = t_{i+1}/t_i and otherwise
//! resets the counter to zero. Since the state is fixed by the counter the
//! simulation carries no matrices.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{normalize_iterate, ChannelTraces, KrausChannel, VANISHING_TRACE};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::schedule::ProbabilitySchedule;

/// Default per-trajectory step budget is this multiple of T+1.
pub const DEFAULT_BUDGET_FACTOR: u64 = 1000;

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedState {
    pub state: DensityMatrix,
    /// Σ r_k R_k t_k.
    pub normalization: f64,
    /// w_k = r_k R_k t_k / normalization.
    pub weights: Vec<f64>,
}

fn check_horizon(rho0: &DensityMatrix, ch: &KrausChannel, s: &ProbabilitySchedule) -> Result<usize> {
    if rho0.dim() != ch.dim() {
        return Err(Error::InvalidInput(format!(
            "initial state has dimension {}, channel acts on {}",
            rho0.dim(),
            ch.dim()
        )));
    }
    Ok(s.horizon())
}

/// E[ρ] = Σ r_k R_k ℰᵏ(ρ₀) / Σ r_l R_l t_l.
pub fn expected_state(ch: &KrausChannel, rho0: &DensityMatrix, s: &ProbabilitySchedule) -> Result<ExpectedState> {
    check_horizon(rho0, ch, s)?;
    let coefficients = s.recover_coefficients();
    let mut current = rho0.matrix().clone();
    let mut sum = ComplexMatrix::zeros(ch.dim(), ch.dim());
    let mut raw_weights = Vec::with_capacity(coefficients.len());
    for (k, c) in coefficients.iter().enumerate() {
        if k > 0 {
            current = ch.apply_unchecked(&current);
        }
        sum = &sum + &current.scale(*c);
        raw_weights.push(c * current.trace().re.max(0.0));
    }
    let normalization: f64 = raw_weights.iter().sum();
    if !(normalization > VANISHING_TRACE) {
        return Err(Error::DegenerateState { steps: 0, trace: normalization });
    }
    let state = DensityMatrix::normalize(sum, 1e-9)?;
    let weights = raw_weights.into_iter().map(|w| w / normalization).collect();
    Ok(ExpectedState { state, normalization, weights })
}

/// E[τ] = Σ R_k t_k / Σ r_k R_k t_k.
pub fn expected_stopping_time(ch: &KrausChannel, rho0: &DensityMatrix, s: &ProbabilitySchedule) -> Result<f64> {
    let horizon = check_horizon(rho0, ch, s)?;
    let traces = ch.iterate_traces(rho0, horizon)?;
    Ok(stopping_time_from_traces(&traces, s))
}

pub fn stopping_time_from_traces(traces: &ChannelTraces, s: &ProbabilitySchedule) -> f64 {
    let t = traces.values();
    let num: f64 = s.survival().iter().zip(t).map(|(r, t)| r * t).sum();
    normalization_from_traces(traces, s).recip() * num
}

/// Σ r_k R_k t_k: the probability that a single pass stops before failing.
pub fn normalization_from_traces(traces: &ChannelTraces, s: &ProbabilitySchedule) -> f64 {
    s.recover_coefficients().iter().zip(traces.values()).map(|(c, t)| c * t).sum()
}

/// Σ_{k≤T} ℰᵏ(ρ₀), unnormalized.
pub fn truncated_series(ch: &KrausChannel, rho0: &DensityMatrix, horizon: usize) -> Result<ComplexMatrix> {
    let iterates = ch.iterates(rho0, horizon)?;
    let n = ch.dim();
    Ok(iterates.iter().fold(ComplexMatrix::zeros(n, n), |acc, x| &acc + x))
}

/// p_{i+1} = t_{i+1}/t_i, or 0 once the trace has vanished.
pub fn success_probabilities(traces: &ChannelTraces) -> Vec<f64> {
    traces
        .values()
        .windows(2)
        .map(|w| if w[0] > VANISHING_TRACE { (w[1] / w[0]).clamp(0.0, 1.0) } else { 0.0 })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectoryOutcome {
    pub stop_index: usize,
    pub restarts: u64,
    /// Loop iterations, counting the final stopping flip.
    pub steps: u64,
}

/// Runs one trajectory of the counter chain.
pub fn run_trajectory<R: Rng + ?Sized>(
    p: &[f64],
    s: &ProbabilitySchedule,
    rng: &mut R,
    max_steps: u64,
) -> Result<TrajectoryOutcome> {
    if p.len() != s.horizon() {
        return Err(Error::InvalidInput(format!("{} success probabilities for horizon {}", p.len(), s.horizon())));
    }
    let r = s.stop_probabilities();
    let mut counter = 0;
    let mut restarts = 0;
    let mut steps = 0;
    loop {
        if steps >= max_steps {
            return Err(Error::RunawayTrajectory { budget: max_steps, restarts });
        }
        steps += 1;
        if r[counter] >= 1.0 || rng.random::<f64>() < r[counter] {
            return Ok(TrajectoryOutcome { stop_index: counter, restarts, steps });
        }
        if rng.random::<f64>() < p[counter] {
            counter += 1;
        } else {
            counter = 0;
            restarts += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    pub n_runs: u64,
    pub master_seed: u64,
    /// Per-trajectory budget; `None` means 1000·(T+1).
    pub max_steps: Option<u64>,
}

impl SampleConfig {
    pub fn new(n_runs: u64, master_seed: u64) -> Self {
        Self { n_runs, master_seed, max_steps: None }
    }
}

/// The generator for run `index` under `master_seed`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleStats {
    pub n_runs: u64,
    /// Stop-index counts, length T+1.
    pub histogram: Vec<u64>,
    pub n_restarts: u64,
    pub stopping_time_mean: f64,
    pub stopping_time_second_moment: f64,
    /// Counts of each observed τ.
    pub stopping_times: BTreeMap<u64, u64>,
}

impl SampleStats {
    pub fn horizon(&self) -> usize {
        self.histogram.len() - 1
    }

    pub fn fractions(&self) -> Vec<f64> {
        self.histogram.iter().map(|&h| h as f64 / self.n_runs as f64).collect()
    }

    pub fn stopping_time_variance(&self) -> f64 {
        (self.stopping_time_second_moment - self.stopping_time_mean.powi(2)).max(0.0)
    }

    /// Standard error of the mean stopping time.
    pub fn stopping_time_std_error(&self) -> f64 {
        let n = self.n_runs as f64;
        (self.stopping_time_variance() * n / (n - 1.0).max(1.0) / n).sqrt()
    }
}

#[derive(Default)]
struct Partial {
    histogram: Vec<u64>,
    restarts: u64,
    steps: u128,
    steps_sq: u128,
    taus: BTreeMap<u64, u64>,
    error: Option<(u64, Error)>,
}

impl Partial {
    fn empty(len: usize) -> Self {
        Self { histogram: vec![0; len], ..Default::default() }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.restarts += other.restarts;
        self.steps += other.steps;
        self.steps_sq += other.steps_sq;
        for (tau, count) in other.taus {
            *self.taus.entry(tau).or_default() += count;
        }
        self.error = match (self.error, other.error) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Monte Carlo with default budget.
pub fn sample(
    ch: &KrausChannel,
    rho0: &DensityMatrix,
    s: &ProbabilitySchedule,
    n_runs: u64,
    master_seed: u64,
) -> Result<SampleStats> {
    sample_with(ch, rho0, s, &SampleConfig::new(n_runs, master_seed))
}

/// Runs `n_runs` seeded trajectories in parallel.
///
/// Run i draws from stream i of the master-seeded generator and partial
/// results are combined with integer sums, so the output does not depend
/// on scheduling. If several runs exceed the budget the lowest index wins.
pub fn sample_with(
    ch: &KrausChannel,
    rho0: &DensityMatrix,
    s: &ProbabilitySchedule,
    config: &SampleConfig,
) -> Result<SampleStats> {
    let horizon = check_horizon(rho0, ch, s)?;
    if config.n_runs == 0 {
        return Err(Error::InvalidInput("need at least one trajectory".into()));
    }
    let traces = ch.iterate_traces(rho0, horizon)?;
    let p = success_probabilities(&traces);
    let budget = config.max_steps.unwrap_or(DEFAULT_BUDGET_FACTOR * (horizon as u64 + 1));
    let n_chunks = config.n_runs.div_ceil(CHUNK as u64);
    let total = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = Partial::empty(horizon + 1);
            let start = chunk * CHUNK as u64;
            let end = (start + CHUNK as u64).min(config.n_runs);
            for index in start..end {
                let mut rng = trajectory_rng(config.master_seed, index);
                match run_trajectory(&p, s, &mut rng, budget) {
                    Ok(out) => {
                        acc.histogram[out.stop_index] += 1;
                        acc.restarts += out.restarts;
                        acc.steps += out.steps as u128;
                        acc.steps_sq += (out.steps as u128).pow(2);
                        *acc.taus.entry(out.steps).or_default() += 1;
                    }
                    Err(e) => {
                        acc.error = Some((index, e));
                        break;
                    }
                }
            }
            acc
        })
        .reduce(|| Partial::empty(horizon + 1), Partial::merge);
    if let Some((_, e)) = total.error {
        return Err(e);
    }
    let n = config.n_runs as f64;
    Ok(SampleStats {
        n_runs: config.n_runs,
        histogram: total.histogram,
        n_restarts: total.restarts,
        stopping_time_mean: total.steps as f64 / n,
        stopping_time_second_moment: total.steps_sq as f64 / n,
        stopping_times: total.taus,
    })
}

/// Σ_k w_k·ρ_k for arbitrary nonnegative weights summing to one.
pub fn mixture(ch: &KrausChannel, rho0: &DensityMatrix, weights: &[f64]) -> Result<DensityMatrix> {
    if weights.is_empty() {
        return Err(Error::InvalidInput("no mixture weights".into()));
    }
    let iterates = ch.iterates(rho0, weights.len() - 1)?;
    let n = ch.dim();
    let mut sum = ComplexMatrix::zeros(n, n);
    for (k, (w, state)) in weights.iter().zip(iterates).enumerate() {
        if *w == 0.0 {
            continue;
        }
        let rho_k = normalize_iterate(state, k)?;
        sum = &sum + &rho_k.matrix().scale(*w);
    }
    DensityMatrix::normalize(sum, 1e-9)
}

/// Σ_k (histogram_k/n_runs)·ρ_k.
pub fn empirical_state(stats: &SampleStats, ch: &KrausChannel, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    mixture(ch, rho0, &stats.fractions())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailCheck {
    /// Fraction of runs with τ ≥ a·(mean τ).
    pub empirical_fraction: f64,
    /// Markov bound 1/a.
    pub bound: f64,
    /// Binomial standard error at the bound.
    pub standard_error: f64,
}

impl TailCheck {
    pub fn holds(&self, sigmas: f64) -> bool {
        self.empirical_fraction <= self.bound + sigmas * self.standard_error
    }
}

/// Markov's inequality P(τ ≥ a·E[τ]) ≤ 1/a with E[τ] taken as the sample mean.
pub fn markov_tail_check(stats: &SampleStats, a: f64) -> Result<TailCheck> {
    if !(a > 1.0) {
        return Err(Error::InvalidInput(format!("tail multiplier must exceed 1, got {a}")));
    }
    let threshold = a * stats.stopping_time_mean;
    let above: u64 = stats.stopping_times.iter().filter(|(&tau, _)| tau as f64 >= threshold).map(|(_, c)| c).sum();
    let n = stats.n_runs as f64;
    let bound = 1.0 / a;
    Ok(TailCheck { empirical_fraction: above as f64 / n, bound, standard_error: (bound * (1.0 - bound) / n).sqrt() })
}
