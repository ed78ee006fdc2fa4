use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the feature pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },

    #[error("unsupported audio encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("audio contains no samples")]
    EmptyAudio,

    #[error("invalid sample value {value} at index {index}")]
    InvalidSample { index: usize, value: f64 },

    #[error("degenerate framing configuration: {0}")]
    DegenerateConfig(String),

    #[error("signal of {len} samples is shorter than one frame ({needed})")]
    SignalTooShort { len: usize, needed: usize },

    #[error("series of length {len} is too short (need at least {needed})")]
    TooShort { len: usize, needed: usize },

    #[error("clip of {seconds:.3} s is too short for beat analysis (need {needed:.1} s)")]
    ClipTooShort { seconds: f64, needed: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("frame {index}: {source}")]
    Frame { index: usize, source: Box<Error> },

    #[error("empty label set")]
    EmptySet,

    #[error("children do not partition the parent set")]
    NotAPartition,

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("forward cache does not belong to the current model parameters")]
    StaleCache,

    #[error("input out of range: {0}")]
    InputOutOfRange(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("split cannot preserve class proportions: {0}")]
    IndivisibleSplit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed data file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("repetition {repetition}, stage {stage}: {source}")]
    Experiment {
        repetition: usize,
        stage: String,
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

/// Broad classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Config,
    Internal,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::UnreadableFile { .. }
            | Error::UnsupportedEncoding(_)
            | Error::EmptyAudio
            | Error::InvalidSample { .. }
            | Error::SignalTooShort { .. }
            | Error::ClipTooShort { .. }
            | Error::Io { .. } => ErrorKind::Io,
            Error::DegenerateConfig(_)
            | Error::SchemaMismatch(_)
            | Error::Config(_)
            | Error::Format { .. }
            | Error::IndivisibleSplit(_)
            | Error::TooFewSamples(_)
            | Error::DegenerateDataset(_)
            | Error::SingleClass
            | Error::InputOutOfRange(_)
            | Error::DimensionMismatch { .. } => ErrorKind::Config,
            Error::Frame { source, .. } | Error::Experiment { source, .. } => source.kind(),
            _ => ErrorKind::Internal,
        }
    }
}
