use thiserror::Error;

/// Errors produced anywhere in the vectorize → train → visualize pipeline.
#[derive(Debug, Error)]
pub enum SomError {
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("term {0:?} is not in the vocabulary")]
    UnknownTerm(String),
    #[error("invalid document frequency {df} for a corpus of {n} documents")]
    InvalidFrequency { df: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("no nonzero rows to train on")]
    EmptyData,
    #[error("worker count must be at least 1")]
    InvalidWorkerCount,
    #[error("every candidate is a padding sentinel")]
    AllSentinels,
    #[error("engine parity violated: {0}")]
    ParityViolation(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("malformed {format} file: {reason}")]
    Format { format: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SomError>;

impl SomError {
    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        SomError::Format {
            format,
            reason: reason.into(),
        }
    }
}
