use std::collections::BTreeMap;

use plyap_core::{Epsilons, ProblemInstance};
use serde::Serialize;

use crate::matrix_io::MatrixJson;

/// One inequality: `observed` against `bound`, in the direction the name states.
#[derive(Serialize, Debug, Clone)]
pub struct Check {
    pub name: String,
    pub bound: f64,
    pub observed: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, bound: f64, observed: f64) -> Self {
        Self { name: name.into(), bound, observed, pass: observed <= bound }
    }

    /// `observed ≥ bound`, allowing `slack` for rounding.
    pub fn at_least(name: impl Into<String>, bound: f64, observed: f64, slack: f64) -> Self {
        Self { name: name.into(), bound, observed, pass: observed >= bound - slack }
    }
}

#[derive(Serialize, Debug, Clone)]
#[serde(untagged)]
pub enum EpsilonsJson {
    Single { epsilon: f64 },
    Pair { epsilon1: f64, epsilon2: f64 },
}

#[derive(Serialize, Debug, Clone)]
pub struct InstanceSummary {
    pub kind: String,
    pub n: usize,
    pub horizon: usize,
    pub required_horizon: usize,
    pub delta: Option<f64>,
    pub targets: EpsilonsJson,
    pub condition_number: Option<f64>,
    pub norm_a: f64,
    pub min_real_eigenvalue: f64,
    pub max_real_eigenvalue: f64,
    pub kraus_norm: f64,
}

impl From<&ProblemInstance> for InstanceSummary {
    fn from(inst: &ProblemInstance) -> Self {
        let targets = match inst.epsilons {
            Epsilons::Single(epsilon) => EpsilonsJson::Single { epsilon },
            Epsilons::Pair(epsilon1, epsilon2) => EpsilonsJson::Pair { epsilon1, epsilon2 },
        };
        Self {
            kind: inst.kind.tag().to_string(),
            n: inst.dim(),
            horizon: inst.horizon,
            required_horizon: inst.required_horizon,
            delta: inst.delta,
            targets,
            condition_number: inst.condition_number,
            norm_a: inst.norm_a,
            min_real_eigenvalue: inst.real_extremes.0,
            max_real_eigenvalue: inst.real_extremes.1,
            kraus_norm: inst.channel.norm(),
        }
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct ExactMetrics {
    pub trace_distance: f64,
    pub expected_stopping_time: f64,
    pub normalization: f64,
    pub solution_trace: f64,
    pub expected_state: MatrixJson,
    pub oracle_state: MatrixJson,
}

#[derive(Serialize, Debug, Clone)]
pub struct MonteCarloMetrics {
    pub n_runs: u64,
    pub seed: u64,
    pub histogram: Vec<u64>,
    pub restarts: u64,
    pub mean_stopping_time: f64,
    pub stopping_time_std_error: f64,
    pub empirical_trace_distance: f64,
    pub markov_tail_fraction: f64,
    pub normalization_estimate: f64,
    pub normalization_std_error: f64,
    /// tr(X) read out from the normalization estimate, when the schedule is uniform.
    pub solution_trace_estimate: Option<f64>,
    pub relative_bias_bound: Option<f64>,
}

#[derive(Serialize, Debug, Clone)]
pub struct RobustnessMetrics {
    pub epsilon_be: f64,
    pub delta_budget: Option<f64>,
    pub diamond_bound: f64,
    pub total_trace_distance: f64,
    pub note: Option<String>,
}

#[derive(Serialize, Debug, Clone)]
pub struct HardnessRow {
    pub horizon: usize,
    pub exact: f64,
    pub bound: f64,
    pub simulated: f64,
}

#[derive(Serialize, Debug, Clone)]
pub struct HardnessTable {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub rows: Vec<HardnessRow>,
}

#[derive(Serialize, Debug, Clone, Default)]
pub struct Readout {
    pub observable_expectation: Option<f64>,
    pub observable_on_oracle: Option<f64>,
    pub overlap: Option<f64>,
    pub overlap_on_oracle: Option<f64>,
    pub swap_test_circuit: Option<f64>,
    pub matrix_element_re: Option<f64>,
    pub matrix_element_im: Option<f64>,
    pub hadamard_test_re: Option<f64>,
    pub hadamard_test_im: Option<f64>,
}

#[derive(Serialize, Debug, Clone)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robustness: Option<RobustnessMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hardness: Option<HardnessTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub readout: Option<Readout>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, String>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            seed,
            instance: None,
            exact: None,
            monte_carlo: None,
            robustness: None,
            hardness: None,
            readout: None,
            diagnostics: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}
