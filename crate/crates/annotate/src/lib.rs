//! Few-shot annotation of raw sentences through a chat-completion endpoint,
//! and agreement scoring between two annotation runs.

mod agreement;
mod client;
mod config;
mod fewshot;

use std::io;

use chunkorder_core::CorpusError;

pub use agreement::{agreement, AgreementError, AgreementReport, ChunkCounts};
pub use client::{Annotator, LineFailure};
pub use config::{AnnotationConfig, MAX_RETRY_LIMIT};
pub use fewshot::{build_prompt, FewShotSet, MIN_EXAMPLES};

/// Environment variable holding the endpoint's bearer token.
pub const API_KEY_VAR: &str = "CHUNKORDER_API_KEY";

#[derive(Debug, thiserror::Error)]
pub enum AnnotateError {
    #[error("CHUNKORDER_API_KEY is not set")]
    AuthMissing,
    #[error("few-shot set has no examples")]
    EmptyFewShot,
    #[error("invalid few-shot set: {0}")]
    InvalidFewShot(String),
    #[error("invalid annotation config: {0}")]
    InvalidConfig(String),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("service error after {attempts} attempt(s): {message}")]
    ServiceError { attempts: u32, message: String },
    #[error("no valid annotation after {attempts} attempt(s): {reason}")]
    MalformedAnnotation {
        attempts: u32,
        reason: String,
        /// The last reply received.
        reply: String,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}
