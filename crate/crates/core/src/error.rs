use thiserror::Error;

/// Everything that can go wrong in the library. Messages name the violated
/// precondition so the CLI can print them verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence is empty")]
    Empty,

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("negative increment {value} at index {index}; pass allow_non_lc to accept it")]
    NegativeDelta { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: usize, right: usize },

    #[error("index {needed} is beyond the horizon {horizon}")]
    HorizonExceeded { needed: usize, horizon: usize },

    #[error("log t = {logt} lies beyond the horizon coverage log mu_P = {limit}")]
    OutsideCoverage { logt: f64, limit: f64 },

    #[error("sequence is not log-convex (lambda decreases at index {index})")]
    NotLogConvex { index: usize },

    #[error("sequence is not normalized (lambda_1 = {lambda1} < 0)")]
    NotNormalized { lambda1: f64 },

    #[error("invalid indices k = {k}, l = {l}: {reason}")]
    InvalidIndices { k: usize, l: usize, reason: String },

    #[error("malformed weight grid: {0}")]
    Grid(String),

    #[error("maximizer of p*log t + log v(t) escapes the right end of the grid at p = {p}; v is not rapidly decreasing there")]
    RapidDecay { p: usize },

    #[error("maximizer of m*log t + log v(t) for m = {m} sits on the grid boundary")]
    GridBoundary { m: f64 },

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("certificate refers to sequence {found:?} but the oracle evaluates {expected:?}")]
    SequenceMismatch { expected: String, found: String },

    #[error("certificate does not verify against this sequence (first failing row {row})")]
    UnverifiedCertificate { row: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("malformed json")]
    Json(#[from] serde_json::Error),

    #[error("i/o failure")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
