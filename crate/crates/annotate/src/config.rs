use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::AnnotateError;

/// Endpoint and request settings for one annotation run.
///
/// The API key is deliberately not part of this struct; see
/// [`crate::Annotator::from_env`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationConfig {
    /// Full URL of a chat-completion endpoint.
    pub endpoint_url: String,
    pub model_name: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_parallel")]
    pub max_parallel: usize,
    /// Extra attempts after the first; at most 10.
    #[serde(default = "default_retry_limit")]
    pub retry_limit: u32,
    pub few_shot_path: PathBuf,
    /// Per-request timeout in seconds.
    #[serde(default = "default_timeout")]
    pub timeout: u64,
    /// Base delay between attempts after a service error, multiplied by the
    /// attempt number.
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
}

fn default_max_parallel() -> usize {
    4
}

fn default_retry_limit() -> u32 {
    2
}

fn default_timeout() -> u64 {
    60
}

fn default_backoff() -> u64 {
    500
}

pub const MAX_RETRY_LIMIT: u32 = 10;

impl AnnotationConfig {
    pub fn new(endpoint_url: impl Into<String>, model_name: impl Into<String>, few_shot_path: impl Into<PathBuf>) -> Self {
        AnnotationConfig {
            endpoint_url: endpoint_url.into(),
            model_name: model_name.into(),
            temperature: 0.0,
            max_parallel: default_max_parallel(),
            retry_limit: default_retry_limit(),
            few_shot_path: few_shot_path.into(),
            timeout: default_timeout(),
            retry_backoff_ms: default_backoff(),
        }
    }

    pub fn validate(&self) -> Result<(), AnnotateError> {
        let invalid = |msg: String| Err(AnnotateError::InvalidConfig(msg));
        if reqwest::Url::parse(&self.endpoint_url).is_err() {
            return invalid(format!("endpoint_url `{}` is not a URL", self.endpoint_url));
        }
        if self.model_name.trim().is_empty() {
            return invalid("model_name is empty".into());
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return invalid(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if self.max_parallel == 0 {
            return invalid("max_parallel must be at least 1".into());
        }
        if self.retry_limit > MAX_RETRY_LIMIT {
            return invalid(format!("retry_limit {} exceeds {MAX_RETRY_LIMIT}", self.retry_limit));
        }
        if self.timeout == 0 {
            return invalid("timeout must be positive".into());
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout)
    }
}
