//! Label hygiene: the `I(·)` validity filter for detector words.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

/// Labels that describe structure rather than objects.
pub const DEFAULT_STOP_LIST: &[&str] = &["wall", "floor", "ceiling", "unknown", "object", "thing"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSanitizer {
    stop_list: BTreeSet<String>,
}

impl Default for LabelSanitizer {
    fn default() -> Self {
        Self::new(DEFAULT_STOP_LIST.iter().copied())
    }
}

impl LabelSanitizer {
    pub fn new<I, S>(stop_list: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            stop_list: stop_list
                .into_iter()
                .filter_map(|s| normalize(s.as_ref()))
                .collect(),
        }
    }

    pub fn stop_list(&self) -> impl Iterator<Item = &str> {
        self.stop_list.iter().map(String::as_str)
    }

    /// Canonical form of one label, or `None` if it carries no object meaning.
    pub fn sanitize_one(&self, raw: &str) -> Option<String> {
        normalize(raw).filter(|l| !self.stop_list.contains(l))
    }

    /// Sanitizes and deduplicates, keeping first occurrences in order.
    pub fn sanitize_labels<I, S>(&self, raw: I) -> Vec<String>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        raw.into_iter()
            .filter_map(|r| self.sanitize_one(r.as_ref()))
            .filter(|l| seen.insert(l.clone()))
            .collect()
    }
}

/// Lowercase, trim, join internal whitespace with `_`; reject labels with no letters.
fn normalize(raw: &str) -> Option<String> {
    let joined = raw
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("_");
    joined.chars().any(char::is_alphabetic).then_some(joined)
}
