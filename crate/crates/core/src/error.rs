use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit {0} appears more than once among targets and controls")]
    OverlappingQubits(usize),

    #[error("empty branch: conditioning event has probability {0:e}")]
    EmptyBranch(f64),

    #[error("post-selection failed: branch probability {0:e}")]
    PostselectionFailed(f64),

    #[error("matrix is not unitary (residual {0:e})")]
    NonUnitary(f64),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NonHermitian(f64),

    #[error("gate `{0}` is not native; run decompose_to_native first")]
    NonNative(String),

    #[error("{qubits} qubits exceed the unitary cap of {cap}; use statevector spot checks instead")]
    UnitaryCap { qubits: usize, cap: usize },

    #[error("circuits are not equivalent up to global phase (residual {0:e})")]
    NotEquivalent(f64),

    #[error("distributions live on different bitstring spaces")]
    DomainMismatch,

    #[error("scaled diagonal exceeds the clock range: n_r = {n_r} is too small, need n_r >= {required}")]
    ClockTooSmall { n_r: usize, required: usize },

    #[error("rotation argument {argument} > 1 at eigenvalue index {index}")]
    RotationDomain { index: usize, argument: f64 },

    #[error("perturbation denominator vanishes between diagonal {i} and {j}; choose a different xi")]
    DegeneratePerturbation { i: usize, j: usize },

    #[error("matrix is near-singular (condition number {0:e})")]
    NearSingular(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("Trotter error budget {error:e} exceeds half the phase grid {limit:e}; reduce delta_t")]
    TrotterBudget { error: f64, limit: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}
