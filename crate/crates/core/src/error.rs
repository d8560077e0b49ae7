use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("bridge index {index} out of range 0..={max}")]
    BridgeOutOfRange { index: usize, max: usize },

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("tableau does not give a lattice path: step {step} breaks {reason}")]
    IllegalPath { step: usize, reason: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid rational {0:?}")]
    BadRational(String),

    #[error("loop {loop_index}: {msg}")]
    LoopSolve { loop_index: usize, msg: String },

    #[error("multiset {0} is not over 0..=r or has the wrong size")]
    BadMultiset(String),

    #[error("duplicate function index {0}")]
    DuplicateIndex(String),

    #[error("graph and functions disagree: {0}")]
    Mismatch(String),

    #[error("envelope has a kink at the midpoint of bridge {0}")]
    KinkAtMidpoint(usize),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("induction not applicable: {0}")]
    NotApplicable(String),

    #[error("unknown library case {0:?}")]
    UnknownCase(String),

    #[error("malformed JSON: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
