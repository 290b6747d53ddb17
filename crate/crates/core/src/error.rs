use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed token at byte {offset}: {token:?}")]
    MalformedToken { offset: usize, token: String },

    #[error("duplicate object id {id} at byte {offset}")]
    DuplicateId { id: usize, offset: usize },

    #[error("object id {id} out of range for universe of size {n} (byte {offset})")]
    IdOutOfRange { id: usize, n: usize, offset: usize },

    #[error("empty block at byte {offset}")]
    EmptyBlock { offset: usize },

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("ordered partition is not exhaustive ({covered} of {n} objects ranked)")]
    NotExhaustive { covered: usize, n: usize },

    #[error("universe mismatch: expected {expected} objects, found {found}")]
    UniverseMismatch { expected: usize, found: usize },

    #[error("enumeration of {requested} terms exceeds the budget of {budget}")]
    BudgetExceeded { requested: String, budget: u64 },

    #[error("ground set of size {n} exceeds the limit {limit} for exhaustive checks")]
    TooLarge { n: usize, limit: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    Asymmetric { deviation: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), message: err.to_string() }
    }

    /// True for errors caused by malformed input data rather than numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Factorization(_) | Error::NonFinite(_))
    }
}
