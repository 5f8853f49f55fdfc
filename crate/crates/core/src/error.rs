use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("k = {k} is outside the valid range [{min}, {max}]")]
    InvalidK { k: usize, min: usize, max: usize },

    #[error("zero distance between points {}", format_pairs(.0))]
    DuplicatePoints(Vec<(usize, usize)>),

    #[error("invalid data matrix: {0}")]
    InvalidData(String),

    #[error("degenerate neighborhood at point {point}: all neighbor distances equal")]
    DegenerateNeighborhood { point: usize },

    #[error("invalid manifold spec: {0}")]
    SpecInvalid(String),

    #[error("malformed manifest {path} line {line}: {reason}")]
    MalformedManifest {
        path: String,
        line: u64,
        reason: String,
    },

    #[error("class {label} has {available} items, sample needs {needed}")]
    InsufficientClass {
        label: u8,
        available: usize,
        needed: usize,
    },

    #[error("invalid sample size: {0}")]
    InvalidSampleSize(String),

    #[error("cannot read image {path}: {reason}")]
    UnreadableImage { path: PathBuf, reason: String },

    #[error("inconsistent dimensions: {0}")]
    InconsistentDims(String),

    #[error("malformed results table line {line}: {reason}")]
    MalformedResults { line: u64, reason: String },

    #[error("degenerate regression design: {0}")]
    DegenerateDesign(String),

    #[error("too few records: need at least {needed}, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("group {group}: {source}")]
    Group {
        group: String,
        #[source]
        source: Box<Error>,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for this error family. Codes are stable and listed
    /// in the README.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Io { .. } => 3,
            Error::InvalidK { .. } => 10,
            Error::DuplicatePoints(_) => 11,
            Error::DegenerateNeighborhood { .. } => 12,
            Error::InvalidData(_) => 13,
            Error::SpecInvalid(_) => 20,
            Error::MalformedManifest { .. } => 30,
            Error::InsufficientClass { .. } => 31,
            Error::InvalidSampleSize(_) => 32,
            Error::UnreadableImage { .. } => 33,
            Error::InconsistentDims(_) => 34,
            Error::MalformedResults { .. } => 40,
            Error::DegenerateDesign(_) => 41,
            Error::TooFewRecords { .. } => 42,
            Error::Group { source, .. } => source.exit_code(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_pairs(pairs: &[(usize, usize)]) -> String {
    const SHOWN: usize = 8;
    let mut s = pairs
        .iter()
        .take(SHOWN)
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(", ");
    if pairs.len() > SHOWN {
        s.push_str(&format!(" and {} more", pairs.len() - SHOWN));
    }
    s
}
