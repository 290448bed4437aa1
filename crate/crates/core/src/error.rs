use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed XML at byte {position}: {message}")]
    MalformedXml { position: u64, message: String },

    #[error("row at byte {position} is missing required attribute `{attribute}`")]
    MissingAttribute { position: u64, attribute: &'static str },

    #[error("invalid value `{value}` for attribute `{attribute}`")]
    InvalidAttribute { attribute: &'static str, value: String },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty token sequence")]
    EmptySequence,

    #[error("training set `{stage}` is degenerate: {positives} positives, {negatives} negatives")]
    DegenerateSet {
        stage: String,
        positives: usize,
        negatives: usize,
    },

    #[error("domain `{domain}` is too small: {reason}")]
    DomainTooSmall { domain: String, reason: String },

    #[error("stage `{stage}` collapsed: no pair was predicted positive")]
    CollapsedStage { stage: String },

    #[error("rerank instance has no clarification question")]
    MissingCq,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl Error {
    /// Stable machine-readable identifier of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedXml { .. } => "malformed_xml",
            Error::MissingAttribute { .. } => "missing_attribute",
            Error::InvalidAttribute { .. } => "invalid_attribute",
            Error::Io(_) => "io",
            Error::Schema(_) => "schema",
            Error::EmptySequence => "empty_sequence",
            Error::DegenerateSet { .. } => "degenerate_set",
            Error::DomainTooSmall { .. } => "domain_too_small",
            Error::CollapsedStage { .. } => "collapsed_stage",
            Error::MissingCq => "missing_cq",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Checkpoint(_) => "checkpoint",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Schema(e.to_string())
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                _ => unreachable!(),
            }
        } else {
            Error::Schema(e.to_string())
        }
    }
}
