use thiserror::Error;

pub type Result<T> = std::result::Result<T, CfreeError>;

#[derive(Debug, Error)]
pub enum CfreeError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("algebra contexts differ")]
    ContextMismatch,

    #[error("degree {requested} requested but series is only known up to degree {available}")]
    Truncation { requested: usize, available: usize },

    #[error("constant term must vanish for {0}")]
    NonzeroConstantTerm(&'static str),

    #[error("{what} is singular (condition number {condition:e})")]
    Singular { what: &'static str, condition: f64 },

    #[error("no moment spec registered for label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("word has {len} generators, above the cap of {cap}")]
    WordTooLong { len: usize, cap: usize },

    #[error("malformed word: {0}")]
    MalformedWord(String),

    #[error("recursion depth guard exceeded ({0})")]
    DepthGuard(usize),

    #[error("Fock vector depth {depth} exceeded")]
    DepthOverflow { depth: usize },

    #[error("moment spec is not centered: {0}")]
    NotCentered(String),

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
