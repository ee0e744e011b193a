//! Classical simulation of a probabilistic algorithm that prepares the
//! normalized solution of a Lyapunov equation, or of a linear system, as
//! the expected output of a restart-and-stop process built from one CP map.
//!
//! The crate computes that expected state in closed form, samples the
//! process by Monte Carlo, and checks both against direct solves.

pub mod channel;
pub mod ensembles;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod problems;
pub mod sampler;
pub mod schedule;

pub use channel::{diamond_bound, ChannelTraces, KrausChannel};
pub use error::{Error, Result};
pub use estimators::{MatrixElement, NormalizationEstimate, Observable, UnitVector};
pub use linalg::{Complex64, ComplexMatrix, DensityMatrix, Spectrum, Tolerances};
pub use problems::{Epsilons, ExactSolution, HardnessInstance, ProblemInstance, ProblemKind, SetupOptions};
pub use sampler::{ExpectedState, SampleConfig, SampleStats, TailCheck, TrajectoryOutcome};
pub use schedule::ProbabilitySchedule;
