use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix does not have full row rank")]
    RankDeficient,
    #[error("dimension {0} is not supported (maximum is 4)")]
    DimensionUnsupported(usize),
    #[error("fundamental parallelepiped has {count} points, above the enumeration cap {cap}")]
    CapExceeded { count: String, cap: u64 },
    #[error("congruences are inconsistent")]
    Inconsistent,
    #[error("moduli {0} and {1} are identical")]
    DuplicateModuli(usize, usize),
    #[error("matrix is not a least common right multiple of the moduli: {0}")]
    NotAnLcrm(String),
    #[error(
        "stage {stage} group {group}: Hermite normal form of anchor^-1 * lcrm is not diagonal"
    )]
    GroupConditionFailed { stage: usize, group: usize },
    #[error("stage {stage}: groups do not cover input {missing}")]
    CoverageIncomplete { stage: usize, missing: usize },
    #[error("stage {stage}: outputs {first} and {second} generate the same lattice")]
    DuplicateOutput {
        stage: usize,
        first: usize,
        second: usize,
    },
    #[error("{x} is not invertible modulo {p}")]
    NotInvertible { x: i128, p: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}
