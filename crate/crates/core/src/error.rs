use std::path::PathBuf;

/// Errors produced by the room-compensation toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty signal")]
    EmptySignal,

    #[error("silent signal: no sample exceeds zero")]
    SilentSignal,

    #[error("non-positive magnitude at bin {bin}")]
    NonPositiveMagnitude { bin: usize },

    #[error("negative radicand at bin {bin}: target below primary response")]
    NegativeRadicand { bin: usize },

    #[error("deficit balance unattainable within +/-{range_db} dB")]
    DeficitBalanceUnattainable { range_db: f64 },

    #[error("supporting source cannot achieve precedence delay ({delay_samples} samples)")]
    NegativeDelay { delay_samples: i64 },

    #[error("sample rate mismatch: {expected} Hz vs {found} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },

    #[error("spectrum grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("filter kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("config: {0}")]
    Config(String),

    #[error("missing input {what}: {path}")]
    MissingInput { what: String, path: PathBuf },

    #[error("audio file {path}: {source}")]
    Audio {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("io {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
