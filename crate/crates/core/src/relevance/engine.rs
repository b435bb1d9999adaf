//! Relevance engine: goal parsing and cached, band-constrained scoring with
//! graceful fallback from a remote backend to the deterministic mock.

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, RelevanceBackend};
use super::cache::{LruTtlCache, DEFAULT_CAPACITY, DEFAULT_TTL};
use super::mock::MockBackend;
use super::sanitize::LabelSanitizer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationEvent {
    pub at: f64,
    pub operation: String,
    pub backend: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheConfig {
    pub capacity: usize,
    /// Seconds.
    pub ttl: f64,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self {
            capacity: DEFAULT_CAPACITY,
            ttl: DEFAULT_TTL,
        }
    }
}

type ScoreKey = (String, String);

pub struct RelevanceEngine {
    backend: Box<dyn RelevanceBackend>,
    fallback: MockBackend,
    sanitizer: LabelSanitizer,
    scores: Mutex<LruTtlCache<ScoreKey, f64>>,
    parses: Mutex<LruTtlCache<String, String>>,
    events: Mutex<Vec<DegradationEvent>>,
}

impl RelevanceEngine {
    pub fn new(
        backend: Box<dyn RelevanceBackend>,
        fallback: MockBackend,
        sanitizer: LabelSanitizer,
        cache: CacheConfig,
    ) -> Self {
        Self {
            backend,
            fallback,
            sanitizer,
            scores: Mutex::new(LruTtlCache::new(cache.capacity, cache.ttl)),
            parses: Mutex::new(LruTtlCache::new(cache.capacity, cache.ttl)),
            events: Mutex::new(Vec::new()),
        }
    }

    /// Engine backed only by `mock`.
    pub fn with_mock(mock: MockBackend, sanitizer: LabelSanitizer, cache: CacheConfig) -> Self {
        Self::new(Box::new(mock.clone()), mock, sanitizer, cache)
    }

    pub fn sanitizer(&self) -> &LabelSanitizer {
        &self.sanitizer
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    pub fn degradations(&self) -> Vec<DegradationEvent> {
        self.events.lock().expect("poisoned").clone()
    }

    fn degrade(&self, now: f64, operation: &str, err: &BackendError) {
        self.events.lock().expect("poisoned").push(DegradationEvent {
            at: now,
            operation: operation.into(),
            backend: self.backend.name().into(),
            reason: err.to_string(),
        });
    }

    /// Canonical target label for a natural-language request.
    pub fn parse_instruction(&self, text: &str, now: f64) -> Result<String> {
        let key = text.trim().to_string();
        if key.is_empty() {
            return Err(Error::ParseFailure(text.into()));
        }
        if let Some(hit) = self.parses.lock().expect("poisoned").get(&key, now) {
            return Ok(hit);
        }
        let parsed = match self.backend.parse_instruction(&key) {
            Ok(l) => Ok(l),
            Err(BackendError::NoLabel) => Err(BackendError::NoLabel),
            Err(e) => {
                self.degrade(now, "parse", &e);
                self.fallback.parse_instruction(&key)
            }
        };
        let label = parsed
            .ok()
            .and_then(|l| self.sanitizer.sanitize_one(&l))
            .ok_or_else(|| Error::ParseFailure(text.into()))?;
        self.parses
            .lock()
            .expect("poisoned")
            .put(key, label.clone(), now);
        Ok(label)
    }

    /// `S_s` for every sanitized label. The target itself always scores 1.
    pub fn score(&self, labels: &[String], target: &str, now: f64) -> BTreeMap<String, f64> {
        let labels = self.sanitizer.sanitize_labels(labels);
        let mut out = BTreeMap::new();
        let mut misses = Vec::new();
        {
            let mut cache = self.scores.lock().expect("poisoned");
            for l in labels {
                if l == target {
                    out.insert(l, 1.0);
                } else if let Some(v) = cache.get(&(l.clone(), target.to_string()), now) {
                    out.insert(l, v);
                } else {
                    misses.push(l);
                }
            }
        }
        if misses.is_empty() {
            return out;
        }
        let fresh = match self.backend.score(&misses, target) {
            Ok(s) => s,
            Err(e) => {
                self.degrade(now, "score", &e);
                self.fallback
                    .score(&misses, target)
                    .expect("mock scoring is infallible")
            }
        };
        let mut cache = self.scores.lock().expect("poisoned");
        for l in misses {
            let v = fresh.get(&l).copied().unwrap_or(0.0);
            cache.put((l.clone(), target.to_string()), v, now);
            out.insert(l, v);
        }
        out
    }

    pub fn cached_scores(&self) -> usize {
        self.scores.lock().expect("poisoned").len()
    }
}
