use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("integration diverged: {component} is not finite at t = {t}")]
    IntegrationDiverged { component: String, t: f64 },

    #[error("unknown {kind} `{id}`; known ids: {}", known.join(", "))]
    UnknownId {
        kind: &'static str,
        id: String,
        known: Vec<String>,
    },

    #[error("coupling of player {player} is not invertible at sample {sample}")]
    NonInvertibleCoupling { player: usize, sample: usize },

    #[error("delay {delay} is not representable with {resolution} cells at dt = {dt}")]
    DelayNotRepresentable {
        delay: f64,
        resolution: usize,
        dt: f64,
    },

    #[error("length mismatch: {context} ({left} vs {right})")]
    LengthMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("set {index}: {source}")]
    InSet { index: usize, source: Box<Error> },

    #[error("duplicate bet for set {0}")]
    DuplicateBet(usize),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable code for structured error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "validation",
            Error::IntegrationDiverged { .. } => "integration_diverged",
            Error::UnknownId { .. } => "unknown_id",
            Error::NonInvertibleCoupling { .. } => "non_invertible_coupling",
            Error::DelayNotRepresentable { .. } => "delay_not_representable",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InsufficientData(_) => "insufficient_data",
            Error::InSet { source, .. } => source.code(),
            Error::DuplicateBet(_) => "duplicate_bet",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }

    /// Offending input field, when the error names one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::Validation { field, .. } => Some(field),
            Error::InSet { source, .. } => source.field(),
            _ => None,
        }
    }

    /// True for errors caused by bad input rather than by a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. } | Error::UnknownId { .. } | Error::Parse { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
