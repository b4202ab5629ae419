use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown mode label `{0}`")]
    UnknownMode(String),
    #[error("duplicate mode label `{0}`")]
    DuplicateMode(String),
    #[error("mode `{label}` has dimension {dim}; at least 2 is required")]
    InvalidDimension { label: String, dim: usize },
    #[error("operators live on different mode spaces")]
    SpaceMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator flagged Hermitian deviates from its adjoint by {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("occupation {n} of mode `{label}` exceeds truncation {dim}")]
    OccupationOutOfRange { label: String, n: usize, dim: usize },
    #[error("truncation {dim} of mode `{label}` leaves thermal tail {tail:e} for N_th = {n_th}")]
    TruncationTooSmall {
        label: String,
        dim: usize,
        n_th: f64,
        tail: f64,
    },
    #[error("negative dissipation rate {0}")]
    NegativeRate(f64),
    #[error("Liouvillian null space is degenerate (smallest bordered singular value {sigma_min:e})")]
    DegenerateSteadyState { sigma_min: f64 },
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("trace drift {drift:e} exceeds tolerance")]
    TraceDrift { drift: f64 },
    #[error("vanishing denominator {0:e}")]
    VanishingDenominator(f64),
    #[error("drive too strong: intracavity occupation {0} exceeds the linear-response bound")]
    DriveTooStrong(f64),
    #[error("mechanical state is not pinned: {0}")]
    NotPinned(String),
    #[error("eigensolver failed: {0}")]
    EigenSolver(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("inconsistent parameters: {0}")]
    InconsistentParameters(String),
    #[error("hybridization is singular at zero detuning (delta = 0)")]
    Resonant,
    #[error("adiabatic elimination not valid: {0}")]
    EliminationInvalid(String),
    #[error("no phonon nonlinearity (Lambda = 0), gate time undefined")]
    NoGate,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
