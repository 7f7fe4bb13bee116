use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular curve (discriminant is zero)")]
    SingularCurve,

    #[error("prime {0} has bad reduction on this curve")]
    BadReductionPrime(u64),

    #[error("prime {0} has good reduction on this curve")]
    GoodReductionPrime(u64),

    #[error("discriminant factorization is incomplete (cofactor {0})")]
    IncompleteFactorization(String),

    #[error("point is not on the curve")]
    PointNotOnCurve,

    #[error("a_p data covers primes below {available}, need primes up to {required}")]
    InsufficientApData { required: u64, available: u64 },

    #[error("delta {0} outside the supported range (0, 3]")]
    DeltaOutOfRange(f64),

    #[error("linear system for the pencil lost rank")]
    DegenerateConfiguration,

    #[error("plane cubic is singular")]
    SingularCubic,

    #[error("base point is a singular point of the cubic")]
    PointAtSingularity,

    #[error("conductor {conductor} exceeds the normalization maximum {max}")]
    ConductorExceedsMax { conductor: String, max: String },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("record {id}: {msg}")]
    Validation { id: String, msg: String },

    #[error("split would leave the {0} set empty")]
    EmptySplit(&'static str),

    #[error("class {0} has no training samples")]
    MissingClass(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("model configuration violates an invariant: {0}")]
    ConfigInvariantViolation(String),

    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NonfiniteLoss { epoch: usize, step: usize },

    #[error("architecture mismatch: {0}")]
    ArchMismatch(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
