use thiserror::Error;

/// Errors raised by the library layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid regulator: {0}")]
    InvalidRegulator(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("set {set} is not measurable for the charge along {filter}")]
    NotMeasurable { set: String, filter: String },
    #[error("no increasing map exists: component {component} of the cap is zero while the regulator is positive there")]
    NoSuchMap { component: usize },
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("hypothesis `{name}` failed: {detail}")]
    Hypothesis { name: String, detail: String },
    #[error("set is not stationary at depth {depth}")]
    NotStationary { depth: u64 },
    #[error("construction did not finish within depth {depth}: {detail}")]
    Construction { depth: u64, detail: String },
    #[error("subsequence selection blocked at index {index}")]
    SelectionBlocked { index: u64 },
    #[error("missing certificate: {0}")]
    MissingCertificate(String),
    #[error("numeric overflow: {0}")]
    Overflow(String),
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownId(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
