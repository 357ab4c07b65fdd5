use std::io;

use thiserror::Error;

/// Errors produced anywhere in the relational-graph pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed input. `line` is 1-based and counts header lines.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid word {0:?}: words must be non-empty and contain no whitespace")]
    InvalidWord(String),

    #[error("invalid pattern {text:?}: {reason}")]
    InvalidPattern { text: String, reason: &'static str },

    #[error("edge ({from}, {to}, {label}) already present; aggregate weights before adding")]
    DuplicateEdge {
        from: usize,
        to: usize,
        label: usize,
    },

    #[error("edge weight {0} is not finite and non-negative")]
    InvalidWeight(f64),

    #[error("word id {0} out of range")]
    UnknownWord(usize),

    #[error("pattern id {0} out of range")]
    UnknownPattern(usize),

    #[error("lemma {0:?} does not occur in the sentence")]
    LemmaAbsent(String),

    #[error("pattern {0:?} does not align with the sentence")]
    Alignment(String),

    #[error("sentence carries no dependency annotation")]
    MissingDependency,

    #[error("triple ({0}, {1}, {2}) has no count")]
    AbsentTriple(usize, usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("training diverged: non-finite loss at epoch {0}")]
    Diverged(usize),

    #[error("model shape does not match the graph: {0}")]
    ShapeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
