use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inverse of zero")]
    InvOfZero,
    #[error("operand {value} is not an element of GF(2^{s})")]
    DomainMismatch { value: u64, s: u32 },
    #[error("invalid modulus {modulus:#x} for degree {s}: {reason}")]
    InvalidModulus { s: u32, modulus: u64, reason: &'static str },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded { what: &'static str, needed: f64, budget: f64 },
    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),
    #[error("bias {0} is not of the form 2^-b")]
    BiasNotPowerOfTwo(String),
    #[error("bipartite split requires an even number of coordinates, got n = {0}")]
    SplitRequiresEvenN(usize),
    #[error("oracle table {0} is identically one; no state can be prepared")]
    EmptySupport(usize),
    #[error("empty set")]
    EmptySet,
    #[error("bad distribution: {0}")]
    BadDistribution(String),
    #[error("encoding of (e, i) overflows GF(2^{r})")]
    EncodingOverflow { r: u32 },
    #[error("evaluation points must be distinct")]
    DistinctnessViolated,
    #[error("retries exhausted for copy {copy}, coordinate {coord}")]
    RetriesExhausted { copy: usize, coord: usize },
    #[error("good set is unsound: decoder fails on a pair flagged good")]
    GoodSetUnsound,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error in {file}:{line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { file: "<json>".into(), line: e.line(), msg: e.to_string() }
    }
}

impl Error {
    pub(crate) fn budget(what: &'static str, needed: f64, budget: f64) -> Self {
        Error::BudgetExceeded { what, needed, budget }
    }
}
