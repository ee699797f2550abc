use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("time must be non-negative and finite, got {0}")]
    NegativeTime(f64),

    #[error("sequence is empty")]
    EmptySequence,

    #[error("overlap {0} lies outside (0, 1]")]
    OverlapOutOfRange(f64),

    #[error("observable support of {support} sites exceeds the {sites}-site apparatus")]
    SupportTooLarge { support: u64, sites: u64 },

    #[error("readout undefined: {0}")]
    ReadoutUndefined(String),

    #[error("not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("entropy {value} outside [0, {bound}]")]
    EntropyOutOfBounds { value: f64, bound: f64 },

    #[error("value {0} is not a valid probability")]
    InvalidProbability(f64),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("wave function support leaves the grid window: {0}")]
    WindowTooSmall(String),

    #[error("sweep error: {0}")]
    Sweep(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
