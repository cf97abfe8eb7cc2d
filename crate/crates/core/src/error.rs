use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input at a specific data row (1-based, header excluded).
    #[error("parse error at row {row}: {message}")]
    Row { row: usize, message: String },

    /// Malformed input not attributable to a single row.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("render error: {0}")]
    Render(String),

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("stage: {stage}, {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn fit(msg: impl Into<String>) -> Self {
        Error::Fit(msg.into())
    }

    pub(crate) fn row(row: usize, msg: impl Into<String>) -> Self {
        Error::Row {
            row,
            message: msg.into(),
        }
    }

    /// Attach the pipeline stage that produced this error.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Process exit code: 2 input/parse, 3 numerical/domain, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Row { .. } | Error::Parse(_) => 2,
            Error::Domain(_) | Error::Fit(_) | Error::Render(_) => 3,
            Error::NotFound(_) | Error::Io(_) => 4,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let row = e.position().map(|p| p.record() as usize);
        match row {
            Some(r) => Error::row(r, e.to_string()),
            None => Error::Parse(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
