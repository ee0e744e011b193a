use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not normal: ||MM^† - M^†M|| = {commutator:.3e}")]
    NotNormal { commutator: f64 },

    #[error("matrix is not stable: norm {norm} is not below 1")]
    Unstable { norm: f64 },

    #[error("matrix is not Hurwitz: largest real eigenvalue part is {max_real}")]
    NotHurwitz { max_real: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("insufficient horizon: requested {requested}, at least {required} required")]
    InsufficientHorizon { requested: usize, required: usize },

    #[error("degenerate state: trace {trace:.3e} after {steps} channel applications")]
    DegenerateState { steps: usize, trace: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("singular Lyapunov equation: eigenvalue pair with |λi + conj(λj)| = {pair:.3e}")]
    SingularLyapunov { pair: f64 },

    #[error("oracle solve is ill-conditioned: residual {residual:.3e} exceeds {limit:.3e}")]
    IllConditioned { residual: f64, limit: f64 },

    #[error("runaway trajectory: step budget {budget} exhausted after {restarts} restarts")]
    RunawayTrajectory { budget: u64, restarts: u64 },
}

impl Error {
    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::NotNormal { .. } => "not-normal",
            Error::Unstable { .. } => "unstable-matrix",
            Error::NotHurwitz { .. } => "not-hurwitz",
            Error::InvalidState(_) => "invalid-state",
            Error::InsufficientHorizon { .. } => "insufficient-horizon",
            Error::DegenerateState { .. } => "degenerate-state",
            Error::InvalidSchedule(_) => "invalid-schedule",
            Error::SingularLyapunov { .. } => "singular-lyapunov",
            Error::IllConditioned { .. } => "ill-conditioned",
            Error::RunawayTrajectory { .. } => "runaway-trajectory",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
