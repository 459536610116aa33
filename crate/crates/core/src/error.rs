use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulation or ranging pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no finite conjugate: {0}")]
    NoFiniteConjugate(String),

    #[error("layout infeasible: {0}")]
    LayoutInfeasible(String),

    #[error("sensor too small: {0}")]
    SensorTooSmall(String),

    #[error("alignment unreliable: {0}")]
    AlignmentUnreliable(String),

    #[error("no valid depth: {0}")]
    NoValidDepth(String),

    #[error("accuracy target missed: {0}")]
    TargetMissed(String),

    #[error("B unidentifiable: {0}")]
    Unidentifiable(String),

    #[error("format error in {context}: {message}")]
    Format { context: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("CSV error in {context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn csv(context: impl Into<String>, source: csv::Error) -> Self {
        Error::Csv {
            context: context.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 2 covers configuration and infeasibility, 3 alignment failure,
    /// 4 no valid depth, 1 anything unexpected.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::InvalidArgument(_)
            | Error::LayoutInfeasible(_)
            | Error::SensorTooSmall(_)
            | Error::NoFiniteConjugate(_)
            | Error::Unidentifiable(_)
            | Error::Format { .. }
            | Error::Json { .. }
            | Error::Csv { .. } => 2,
            Error::AlignmentUnreliable(_) => 3,
            Error::NoValidDepth(_) => 4,
            Error::Io { .. } | Error::TargetMissed(_) => 1,
        }
    }
}
