use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline. The variant groups map onto the
/// CLI exit codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unresolved degeneracy: {0}")]
    UnresolvedDegeneracy(String),

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("missing dependency: {0}")]
    Dependency(String),

    #[error("parse error in {path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 input, 3 resource, 4 numerical, 5 integrity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parse { .. } | Error::Json(_) | Error::Dependency(_) => 2,
            Error::Io { .. } => 2,
            Error::Resource(_) | Error::Generation(_) => 3,
            Error::Numerical(_) | Error::UnresolvedDegeneracy(_) => 4,
            Error::Integrity(_) => 5,
        }
    }
}
