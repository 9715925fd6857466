use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // The cause is part of the message rather than `source()`, so chained
    // reports do not print it twice.
    #[error("{path}: {cause}")]
    Io {
        path: PathBuf,
        cause: std::io::Error,
    },

    /// A document could not be parsed. `at` names the offending location,
    /// either a JSON path (`root.children[2].bounds`) or `file:line`.
    #[error("parse error at {at}: {message}")]
    Parse { at: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("duplicate screen id {0:?}")]
    DuplicateId(String),

    #[error("coordinate ({x}, {y}) outside screen {width}x{height}")]
    OutOfRange {
        x: f64,
        y: f64,
        width: u32,
        height: u32,
    },

    #[error("empty query term")]
    EmptyQueryTerm,

    #[error("empty query: no icons and no text")]
    EmptyQuery,

    #[error("bounding box has zero area")]
    DegenerateBox,

    #[error("no doodle placements given")]
    EmptyPlacements,

    #[error("empty sketch")]
    EmptySketch,

    #[error("no training examples for class {0}")]
    MissingExamples(String),

    #[error("unknown icon class {name:?}; supported classes: {supported}")]
    UnknownClass { name: String, supported: String },

    #[error("unknown screen id {0:?}")]
    UnknownScreen(String),

    #[error("text and sketch indexes were built from different corpora")]
    IndexMismatch,

    #[error("{what}: unsupported format (expected {expected})")]
    Format { what: String, expected: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause: source,
        }
    }

    /// Name the file a format error came from.
    pub(crate) fn at_path(self, path: &std::path::Path) -> Self {
        match self {
            Error::Format { what, expected } => Error::Format {
                what: format!("{} ({what})", path.display()),
                expected,
            },
            other => other,
        }
    }

    pub(crate) fn parse(at: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            at: at.into(),
            message: message.into(),
        }
    }
}
