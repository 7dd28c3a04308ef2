use std::fmt;

use chunkorder_annotate::AnnotateError;
use chunkorder_core::{CorpusError, EmbeddingError, StatsError};

/// Error classes and their process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration: exit 1.
    Usage,
    /// Input data could not be read or analysed: exit 2.
    Data,
    /// The annotation endpoint failed: exit 3.
    Service,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Service => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }

    pub fn service(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Service,
            message: message.into(),
        }
    }

    /// Prefixes the message with where the error happened.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<AnnotateError> for CliError {
    fn from(e: AnnotateError) -> Self {
        let kind = match e {
            AnnotateError::InvalidConfig(_) | AnnotateError::InvalidFewShot(_) | AnnotateError::EmptyFewShot => {
                ErrorKind::Usage
            }
            AnnotateError::Io(_) | AnnotateError::Corpus(_) => ErrorKind::Data,
            AnnotateError::AuthMissing
            | AnnotateError::ServiceError { .. }
            | AnnotateError::MalformedAnnotation { .. } => ErrorKind::Service,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}
