use thiserror::Error;

use crate::edit::Edit;
use crate::synth::CorrectionId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid token {0:?}")]
    InvalidToken(String),

    #[error("invalid edit: {0}")]
    InvalidEdit(String),

    #[error("overlapping edits: {first} and {second}")]
    Overlap { first: Box<Edit>, second: Box<Edit> },

    #[error("corpora have different sentence counts ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("sentence {index}: source tokens differ between corpora")]
    SourceMismatch { index: usize },

    #[error("at least two systems are required, got {0}")]
    TooFewSystems(usize),

    #[error("{0}")]
    InvalidInput(String),

    #[error(
        "no pool sentence accepts the drawn corrections after {attempts} attempts \
         ({produced} pairs generated so far; last draw: {draw:?})"
    )]
    GenerationExhausted {
        attempts: usize,
        produced: usize,
        draw: Vec<CorrectionId>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the environment rather than of the input data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
