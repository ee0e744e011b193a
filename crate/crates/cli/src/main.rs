//! `plyap`: closed-form and Monte Carlo runs of the stopped-process solver,
//! with every error bound checked and reported as JSON.

mod commands;
mod matrix_io;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plyap_core::ProblemKind;

pub const DEFAULT_SEED: u64 = 20250806;

#[derive(Parser, Debug)]
#[command(name = "plyap", version, about = "Stopped-process Lyapunov and inversion simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an instance, compare its expected state to the exact solution.
    Solve(SolveArgs),
    /// Monte Carlo run of the stopped process against the closed forms.
    Sample(SampleArgs),
    /// Perturb the channel within the robustness budget and re-check the error.
    Robustness(RobustnessArgs),
    /// Tabulate the slow-convergence instance against its lower bound.
    Hardness(HardnessArgs),
    /// Observable and overlap read-outs on a solved instance.
    Estimate(EstimateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: ProblemKind,
    #[arg(long)]
    pub matrix_a: PathBuf,
    /// Source term; required for the Lyapunov kinds.
    #[arg(long)]
    pub matrix_b: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon1: f64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon2: f64,
    /// Horizon override, at least the required T*.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Step-size override for the continuous kinds, at most Δ*.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Slack for normality, Hermiticity, positivity and tr(B) = 1.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Also run this many Monte Carlo trajectories.
    #[arg(long)]
    pub trajectories: Option<u64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trajectories: u64,
    /// Per-trajectory step budget (default 1000·(T+1)).
    #[arg(long)]
    pub max_steps: Option<u64>,
}

#[derive(Args, Debug)]
pub struct RobustnessArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon_be: f64,
}

#[derive(Args, Debug)]
pub struct HardnessArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 10)]
    pub t_max: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Hermitian observable O for tr(Oρ).
    #[arg(long)]
    pub observable: Option<PathBuf>,
    /// Pure state ψ for ⟨ψ|ρ|ψ⟩ (SWAP test).
    #[arg(long)]
    pub psi: Option<PathBuf>,
    /// Second pure state φ for ⟨φ|ρ|ψ⟩ (Hadamard test); needs --psi.
    #[arg(long, requires = "psi")]
    pub phi: Option<PathBuf>,
    /// Also estimate tr(X) from this many trajectories.
    #[arg(long)]
    pub trajectories: Option<u64>,
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    s.parse::<ProblemKind>().map_err(|e| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Io(String),
    Precondition(plyap_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) | CliError::Io(_) => 3,
            CliError::Precondition(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Io(_) => "io",
            CliError::Precondition(e) => e.kind(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Io(m) => f.write_str(m),
            CliError::Precondition(e) => write!(f, "{e}"),
        }
    }
}

impl From<plyap_core::Error> for CliError {
    fn from(e: plyap_core::Error) -> Self {
        CliError::Precondition(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (result, output) = match &cli.command {
        Command::Solve(a) => (commands::solve(a), a.instance.output.clone()),
        Command::Sample(a) => (commands::sample(a), a.instance.output.clone()),
        Command::Robustness(a) => (commands::robustness(a), a.instance.output.clone()),
        Command::Hardness(a) => (commands::hardness(a), a.output.clone()),
        Command::Estimate(a) => (commands::estimate(a), a.instance.output.clone()),
    };
    let outcome = result.and_then(|report| {
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        match output {
            Some(path) => std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        Ok(report.passed())
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let record = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{record}");
            ExitCode::from(e.exit_code())
        }
    }
}
