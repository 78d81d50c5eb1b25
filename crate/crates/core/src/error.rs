use thiserror::Error;

/// Errors raised across the library. Each variant maps onto a CLI exit code
/// through [`SteError::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteError {
    #[error("degenerate frequency: omega = epsilon = 0 collapses the operator basis")]
    DegenerateFrequency,

    #[error("time {t} outside protocol support [0, {tf}]")]
    OutOfRange { t: f64, tf: f64 },

    #[error("non-positive frequency {0}")]
    NonPositiveFrequency(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("overflow guard: |beta| = {0} exceeds 50")]
    Overflow(f64),

    #[error("step-doubling error estimate {estimate:.3e} at t = {t} exceeds 1e-6")]
    StepTooLarge { t: f64, estimate: f64 },

    #[error("singular linear system")]
    SingularSystem,

    #[error("ansatz y(t) = {value:e} is not positive at t = {t}")]
    NonPositiveAnsatz { t: f64, value: f64 },

    #[error("no admissible root for alpha at t = {t} (target beta_dot = {beta_dot})")]
    NoRoot { t: f64, beta_dot: f64 },

    #[error("positivity lost: min eigenvalue {min_eig:e} at t = {t}")]
    PositivityLoss { t: f64, min_eig: f64 },

    #[error("degenerate Hamiltonian: gap {0:e} below 1e-12")]
    DegenerateHamiltonian(f64),

    #[error("non-thermal state: beta = {0} is not negative")]
    NonThermalState(f64),

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("inertial condition violated: max (dmu/dt)/(2 kappa^2 rabi) = {0}")]
    InertialViolation(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl SteError {
    /// Process exit code: 2 for configuration problems, 3 for synthesis
    /// infeasibility, 4 for integration failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            SteError::Config(_) => 2,
            SteError::NoRoot { .. } | SteError::NonPositiveAnsatz { .. } => 3,
            SteError::PositivityLoss { .. }
            | SteError::StepTooLarge { .. }
            | SteError::Overflow(_)
            | SteError::InvalidState(_) => 4,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for SteError {
    fn from(e: std::io::Error) -> Self {
        SteError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SteError>;
