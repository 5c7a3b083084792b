use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("run-length counts sum to {actual}, expected {expected}")]
    CountMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("sequence length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("frame {index} missing from {}", dir.display())]
    MissingFrame { dir: PathBuf, index: usize },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("expression {0:?} is not of the form `the <color> <shape>`")]
    ExpressionParse(String),

    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("embedding has zero norm")]
    ZeroNormEmbedding,

    #[error("every candidate key frame produced an empty mask")]
    AllCandidatesEmpty,

    #[error("key frame {k} outside 1..={len}")]
    KeyFrameOutOfRange { k: usize, len: usize },

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("scene spec: {0}")]
    Spec(String),

    #[error("backend handshake failed: {0}")]
    HandshakeFailure(String),

    #[error("backend protocol error: {0}")]
    Protocol(String),

    #[error("backend did not answer within {0:?}")]
    BackendTimeout(std::time::Duration),

    #[error("backend error at frame {frame}: {source}")]
    AtFrame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    /// True for failures that originate in a segmentation/alignment backend.
    pub fn is_backend(&self) -> bool {
        match self {
            Error::HandshakeFailure(_) | Error::Protocol(_) | Error::BackendTimeout(_) => true,
            Error::AtFrame { source, .. } => source.is_backend(),
            _ => false,
        }
    }
}
