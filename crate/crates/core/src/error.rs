use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("corpus has no sentences")]
    EmptyCorpus,
    #[error("no samples to test")]
    EmptySamples,
    #[error("need at least {needed} observations per sample, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("no sentence contains both <{fc}> and <{anchor}>")]
    NoEligibleSentences { fc: String, anchor: String },
    #[error("argument out of domain: {0}")]
    Domain(String),
}
