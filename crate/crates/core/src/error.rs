use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no allowable plane found after {0} attempts")]
    ProposalExhausted(usize),

    #[error("degenerate closure: {0}")]
    DegenerateClosure(String),

    #[error("no generic projection found after {0} attempts")]
    DiagramFailure(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
