use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("trap unstable: cyclotron frequency {omega_c:.6e} rad/s does not exceed sqrt(2) x axial frequency {omega_z:.6e} rad/s")]
    TrapUnstable { omega_c: f64, omega_z: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular response: {0}")]
    SingularResponse(String),

    #[error("homodyne angle {theta} rad carries no motional signal")]
    QuadratureSingular { theta: f64 },

    #[error("quadrature did not converge: estimated relative error {rel_err:.3e} after {evals} evaluations")]
    IntegrationFailure { rel_err: f64, evals: usize },

    #[error("grid refused: {0}")]
    RefusesGrid(String),

    #[error("no feasible point among {0} samples")]
    NoFeasiblePoint(usize),

    #[error("time step too large: dt * max frequency = {0:.3} (limit 0.1)")]
    StepTooLarge(f64),

    #[error("state became non-finite at step {step} of trajectory {trajectory}")]
    NonFiniteState { trajectory: u64, step: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            Error::TrapUnstable { .. }
            | Error::Domain(_)
            | Error::SingularResponse(_)
            | Error::QuadratureSingular { .. }
            | Error::NoFeasiblePoint(_) => 2,
            Error::IntegrationFailure { .. }
            | Error::RefusesGrid(_)
            | Error::StepTooLarge(_)
            | Error::NonFiniteState { .. }
            | Error::GridMismatch(_) => 3,
        }
    }
}
