//! The single-Kraus CP map ℰ(ρ) = MρM† and its approximate variant.
//!
//! The complementary branch of the instrument is never represented: the
//! sampler only needs the probability 1 − tr ℰ(ρ) with which it fires, and
//! its output is always discarded in favor of a fresh ρ₀.

use crate::ensembles;
use crate::error::{Error, Result};
use crate::linalg::{is_psd, op_norm, ComplexMatrix, DensityMatrix, DEFAULT_TOL};

/// Slack on ‖M‖ ≤ 1 for rounding in sqrtm/expm constructions.
pub const NORM_SLACK: f64 = 1e-10;

/// Traces below this are treated as an absorbed (zero-probability) state.
pub const VANISHING_TRACE: f64 = 1e-14;

/// Trace non-increasing CP map with one square Kraus operator.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    kraus: ComplexMatrix,
    norm: f64,
}

impl KrausChannel {
    pub fn new(kraus: ComplexMatrix) -> Result<Self> {
        kraus.require_square("Kraus operator")?;
        let norm = op_norm(&kraus)?;
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::InvalidInput(format!("Kraus operator has norm {norm}, channel would increase trace")));
        }
        Ok(Self { kraus, norm })
    }

    pub fn identity(n: usize) -> Self {
        Self { kraus: ComplexMatrix::identity(n), norm: 1.0 }
    }

    pub fn kraus(&self) -> &ComplexMatrix {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus.rows()
    }

    /// ‖M‖_op.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn check_dim(&self, rho: &ComplexMatrix) -> Result<()> {
        if rho.rows() != self.dim() || rho.cols() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "state is {}x{}, channel acts on dimension {}",
                rho.rows(),
                rho.cols(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        (&(&self.kraus * rho) * &self.kraus.adjoint()).hermitian_part()
    }

    /// M·ρ·M†, unnormalized.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(rho)?;
        debug_assert!(is_psd(rho, 1e-8), "channel input is not PSD");
        Ok(self.apply_unchecked(rho))
    }

    /// ℰᵏ(ρ₀) for k = 0..=horizon by repeated application.
    pub fn iterates(&self, rho0: &DensityMatrix, horizon: usize) -> Result<Vec<ComplexMatrix>> {
        self.check_dim(rho0.matrix())?;
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(rho0.matrix().clone());
        for k in 0..horizon {
            let next = self.apply_unchecked(&out[k]);
            out.push(next);
        }
        Ok(out)
    }

    /// t_k = tr ℰᵏ(ρ₀) for k = 0..=horizon.
    pub fn iterate_traces(&self, rho0: &DensityMatrix, horizon: usize) -> Result<ChannelTraces> {
        self.check_dim(rho0.matrix())?;
        let mut traces = Vec::with_capacity(horizon + 1);
        let mut current = rho0.matrix().clone();
        traces.push(current.trace().re);
        for _ in 0..horizon {
            current = self.apply_unchecked(&current);
            traces.push(current.trace().re.max(0.0));
        }
        ChannelTraces::new(traces)
    }

    /// ρ_k = ℰᵏ(ρ₀)/tr ℰᵏ(ρ₀).
    pub fn normalized_iterate(&self, rho0: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
        let state = self.iterates(rho0, k)?.pop().expect("iterates are nonempty");
        normalize_iterate(state, k)
    }

    /// Randomly perturbed Kraus operator M̃ with diamond_bound(M, M̃) ≤ δ and ‖M̃‖ ≤ 1.
    ///
    /// The perturbation direction is a seeded Ginibre matrix; its size is
    /// chosen from the budget and halved until the bound is met.
    pub fn perturb(&self, delta_target: f64, seed: u64) -> Result<KrausChannel> {
        if !(delta_target > 0.0) || !delta_target.is_finite() {
            return Err(Error::InvalidInput(format!("perturbation budget must be positive, got {delta_target}")));
        }
        let mut rng = ensembles::seeded(seed);
        let direction = ensembles::gaussian_matrix(&mut rng, self.dim(), self.dim());
        let direction = direction.scale(1.0 / op_norm(&direction)?);
        // (2‖M‖ + s)·s = δ bounds diamond_bound before any renormalization
        let m = self.norm;
        let mut size = delta_target / (m + (m * m + delta_target).sqrt());
        for _ in 0..200 {
            let mut candidate = &self.kraus + &direction.scale(size);
            let norm = op_norm(&candidate)?;
            if norm > 1.0 {
                candidate = candidate.scale(1.0 / norm);
            }
            let bound = diamond_bound(&self.kraus, &candidate)?;
            if bound <= delta_target {
                return KrausChannel::new(candidate);
            }
            size *= 0.5;
        }
        Ok(self.clone())
    }
}

pub(crate) fn normalize_iterate(state: ComplexMatrix, steps: usize) -> Result<DensityMatrix> {
    let trace = state.trace().re;
    if !(trace > VANISHING_TRACE) {
        return Err(Error::DegenerateState { steps, trace });
    }
    DensityMatrix::normalize(state, 1e-9)
}

/// Computable upper bound (‖M‖ + ‖M̃‖)·‖M − M̃‖ on the diamond distance of the induced maps.
pub fn diamond_bound(m: &ComplexMatrix, m_tilde: &ComplexMatrix) -> Result<f64> {
    m.require_same_shape(m_tilde, "diamond bound")?;
    let diff = op_norm(&(m - m_tilde))?;
    if diff == 0.0 {
        return Ok(0.0);
    }
    Ok((op_norm(m)? + op_norm(m_tilde)?) * diff)
}

/// Traces t_k = tr ℰᵏ(ρ₀) of the iterated channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTraces(Vec<f64>);

impl ChannelTraces {
    /// Validates t₀ = 1 and 0 ≤ t_{k+1} ≤ t_k (both with 1e-10 slack).
    pub fn new(traces: Vec<f64>) -> Result<Self> {
        match traces.first() {
            Some(t0) if (t0 - 1.0).abs() <= DEFAULT_TOL => {}
            Some(t0) => return Err(Error::InvalidInput(format!("t_0 must be 1, got {t0}"))),
            None => return Err(Error::InvalidInput("empty trace sequence".into())),
        }
        for (k, pair) in traces.windows(2).enumerate() {
            if pair[1] < -DEFAULT_TOL || pair[1] > pair[0] + DEFAULT_TOL {
                return Err(Error::InvalidInput(format!(
                    "trace sequence not monotone at k = {}: {} then {}",
                    k, pair[0], pair[1]
                )));
            }
        }
        Ok(Self(traces))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn horizon(&self) -> usize {
        self.0.len() - 1
    }
}
