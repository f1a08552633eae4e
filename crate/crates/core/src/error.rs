use std::fmt;
use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while reading, writing or checking an event log.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed JSON at byte {offset}: {message}")]
    MalformedJson { offset: u64, message: String },

    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },

    #[error("reserved key misuse at {path}: {message}")]
    ReservedKeyMisuse { path: String, message: String },

    #[error("integer out of range at {path}: {literal}")]
    IntOutOfRange { path: String, literal: String },

    #[error("duplicate key {key:?} at {path}")]
    DuplicateKey { path: String, key: String },

    #[error("unknown key at {path}")]
    UnknownKey { path: String },

    #[error("malformed XML at byte {position}: {message}")]
    MalformedXml { position: u64, message: String },

    #[error("unsupported XES construct at {path}: {message}")]
    UnsupportedConstruct { path: String, message: String },

    #[error("cannot serialize: {0}")]
    Unrepresentable(String),

    #[error("invalid generator profile: {0}")]
    InvalidProfile(String),

    #[error("invalid bench configuration: {0}")]
    InvalidBench(String),

    #[error("report is empty")]
    EmptyReport,
}

impl Error {
    /// Stable diagnostic code, shared with validator output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io(_) => "IoFailure",
            Error::MalformedJson { .. } => "MalformedJson",
            Error::SchemaViolation { .. } => "SchemaViolation",
            Error::ReservedKeyMisuse { .. } => "ReservedKeyMisuse",
            Error::IntOutOfRange { .. } => "IntOutOfRange",
            Error::DuplicateKey { .. } => "DuplicateKey",
            Error::UnknownKey { .. } => "UnknownKey",
            Error::MalformedXml { .. } => "MalformedXml",
            Error::UnsupportedConstruct { .. } => "UnsupportedConstruct",
            Error::Unrepresentable(_) => "Unrepresentable",
            Error::InvalidProfile(_) => "InvalidProfile",
            Error::InvalidBench(_) => "InvalidBench",
            Error::EmptyReport => "EmptyReport",
        }
    }

    /// JSON path (or XES element path) of the failure, when it has one.
    pub fn path(&self) -> Option<&str> {
        match self {
            Error::SchemaViolation { path, .. }
            | Error::ReservedKeyMisuse { path, .. }
            | Error::IntOutOfRange { path, .. }
            | Error::DuplicateKey { path, .. }
            | Error::UnknownKey { path }
            | Error::UnsupportedConstruct { path, .. } => Some(path),
            _ => None,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }

    pub(crate) fn schema(path: impl fmt::Display, message: impl Into<String>) -> Self {
        Error::SchemaViolation {
            path: path.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn reserved(path: impl fmt::Display, message: impl Into<String>) -> Self {
        Error::ReservedKeyMisuse {
            path: path.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn unsupported(path: impl fmt::Display, message: impl Into<String>) -> Self {
        Error::UnsupportedConstruct {
            path: path.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn from_serde(err: serde_json::Error) -> Self {
        if err.is_io() {
            Error::Io(err.into())
        } else {
            Error::Unrepresentable(err.to_string())
        }
    }
}

/// A non-fatal finding raised while reading a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub code: &'static str,
    pub path: String,
    pub message: String,
}

impl Warning {
    pub(crate) fn new(code: &'static str, path: impl fmt::Display, message: impl Into<String>) -> Self {
        Warning {
            code,
            path: path.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}
