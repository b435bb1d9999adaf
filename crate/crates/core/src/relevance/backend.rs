use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("request timed out")]
    Timeout,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Format(String),
    #[error("no object label could be resolved")]
    NoLabel,
}

/// A source of instruction parses and relevance scores.
pub trait RelevanceBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Canonical target label named by `text`.
    fn parse_instruction(&self, text: &str) -> Result<String, BackendError>;

    /// Relevance of each label to `target`, one entry per input label.
    fn score(&self, labels: &[String], target: &str) -> Result<BTreeMap<String, f64>, BackendError>;
}
