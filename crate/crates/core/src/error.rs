use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular boundary system at t = {t}, z = {z}: estimated condition number {condition:.3e}")]
    SingularSystem { t: f64, z: String, condition: f64 },

    #[error("boundary block is rank deficient (rank {rank} < {expected})")]
    DefectiveReduction { rank: usize, expected: usize },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("eigenvalue {0} lies on the branch cut (-inf, 0]")]
    BranchCutHit(String),

    #[error("branch tracking failed: {0}")]
    BranchJump(String),

    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("spectrum enumeration incomplete: {0}")]
    IncompleteEnumeration(String),

    #[error("s = {s} coincides with a heat exponent pole; regular part {regular_part}")]
    PoleHit { s: String, regular_part: String },

    #[error("insufficient spectrum: {0}")]
    InsufficientSpectrum(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("fit residual too large: {0}")]
    ResidualTooLarge(String),

    #[error("z = {0} is a Dirichlet eigenvalue")]
    EigenvalueHit(String),

    #[error("tail model mismatch: {0}")]
    TailModelMismatch(String),

    #[error("tail bound violated: {0}")]
    TailBoundViolated(String),

    #[error("contour does not enclose the spectrum: {0}")]
    SpectrumNotEnclosed(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("corrupt cache: {0}")]
    CacheCorrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid(_) | Error::CacheCorrupt(_) | Error::Io(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
