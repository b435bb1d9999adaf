//! HTTP JSON client for a hosted language model.
//!
//! Request body: `{"template_id": .., "variables": {..}, "temperature": ..}`.
//! Response body: `{"answer": "..", "scores": {"label": value, ..}}`.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, RelevanceBackend};
use super::bands::BandTable;
use super::sanitize::LabelSanitizer;

pub const PARSE_TEMPLATE: &str = include_str!("../../templates/parse_v1.txt");
pub const RELEVANCE_TEMPLATE: &str = include_str!("../../templates/relevance_v1.txt");
pub const PARSE_TEMPLATE_ID: &str = "parse_v1";
pub const RELEVANCE_TEMPLATE_ID: &str = "relevance_v1";

pub const ENV_URL: &str = "SEMNAV_LLM_URL";
pub const ENV_KEY: &str = "SEMNAV_LLM_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub url: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub temperature: f64,
}

impl RemoteConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            api_key: None,
            timeout: Duration::from_secs(10),
            temperature: 0.01,
        }
    }

    /// Endpoint and credential from `SEMNAV_LLM_URL` / `SEMNAV_LLM_KEY`.
    pub fn from_env() -> Option<Self> {
        let url = std::env::var(ENV_URL).ok().filter(|u| !u.is_empty())?;
        Some(Self {
            api_key: std::env::var(ENV_KEY).ok().filter(|k| !k.is_empty()),
            ..Self::new(url)
        })
    }
}

#[derive(Debug, Serialize)]
struct Request<'a> {
    template_id: &'a str,
    variables: BTreeMap<&'a str, String>,
    temperature: f64,
}

#[derive(Debug, Deserialize)]
struct Response {
    answer: String,
    #[serde(default)]
    scores: BTreeMap<String, f64>,
}

/// Substitutes `{name}` placeholders; unknown placeholders are left as is.
pub fn render_template(template: &str, vars: &BTreeMap<&str, String>) -> String {
    let mut out = String::with_capacity(template.len());
    for line in template.lines().filter(|l| !l.starts_with("# template:")) {
        let mut s = line.to_string();
        for (k, v) in vars {
            s = s.replace(&format!("{{{k}}}"), v);
        }
        out.push_str(&s);
        out.push('\n');
    }
    out
}

pub struct RemoteBackend {
    cfg: RemoteConfig,
    agent: ureq::Agent,
    bands: BandTable,
    vocabulary: Vec<String>,
    sanitizer: LabelSanitizer,
}

impl RemoteBackend {
    pub fn new(cfg: RemoteConfig, bands: BandTable, vocabulary: Vec<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(true)
            .build()
            .into();
        Self {
            cfg,
            agent,
            bands,
            vocabulary,
            sanitizer: LabelSanitizer::new(Vec::<String>::new()),
        }
    }

    fn call(&self, template_id: &str, template: &str, mut vars: BTreeMap<&str, String>) -> Result<Response, BackendError> {
        let prompt = render_template(template, &vars);
        vars.insert("prompt", prompt);
        let body = Request {
            template_id,
            variables: vars,
            temperature: self.cfg.temperature,
        };
        let mut req = self.agent.post(&self.cfg.url);
        if let Some(key) = &self.cfg.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let resp = req.send_json(&body).map_err(map_err)?;
        resp.into_body()
            .read_json::<Response>()
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => BackendError::Timeout,
                other => BackendError::Format(other.to_string()),
            })
    }

    fn band_text(&self, r: [f64; 2]) -> String {
        format!("{:.2} to {:.2}", r[0], r[1])
    }
}

fn map_err(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        ureq::Error::Json(e) => BackendError::Format(e.to_string()),
        other => BackendError::Transport(other.to_string()),
    }
}

impl RelevanceBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn parse_instruction(&self, text: &str) -> Result<String, BackendError> {
        let vars = BTreeMap::from([
            ("instruction", text.to_string()),
            ("vocabulary", self.vocabulary.join(", ")),
        ]);
        let resp = self.call(PARSE_TEMPLATE_ID, PARSE_TEMPLATE, vars)?;
        let label = self
            .sanitizer
            .sanitize_one(resp.answer.trim().trim_matches(|c: char| c.is_ascii_punctuation()))
            .ok_or(BackendError::NoLabel)?;
        if !self.vocabulary.is_empty() && !self.vocabulary.contains(&label) {
            return Err(BackendError::Format(format!("answer {label:?} is not in the vocabulary")));
        }
        Ok(label)
    }

    fn score(&self, labels: &[String], target: &str) -> Result<BTreeMap<String, f64>, BackendError> {
        let vars = BTreeMap::from([
            ("target", target.to_string()),
            ("labels", labels.join(", ")),
            ("band_strong", self.band_text(self.bands.same_scene_strong)),
            ("band_related", self.band_text(self.bands.scene_related)),
            ("band_weak", self.band_text(self.bands.weakly_related)),
            ("band_unrelated", self.band_text(self.bands.unrelated)),
        ]);
        let resp = self.call(RELEVANCE_TEMPLATE_ID, RELEVANCE_TEMPLATE, vars)?;
        let mut out = BTreeMap::new();
        for l in labels {
            let v = *resp
                .scores
                .get(l)
                .ok_or_else(|| BackendError::Format(format!("no score for {l:?}")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(BackendError::Format(format!("score {v} for {l:?} outside [0, 1]")));
            }
            out.insert(l.clone(), v);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_render_all_placeholders() {
        let vars = BTreeMap::from([
            ("instruction", "Help me find the bed".to_string()),
            ("vocabulary", "bed, lamp".to_string()),
        ]);
        let p = render_template(PARSE_TEMPLATE, &vars);
        assert!(p.contains("Request: Help me find the bed"));
        assert!(!p.contains("{instruction}"));
        assert!(!p.contains("# template"));
    }

    #[test]
    fn relevance_template_lists_every_band() {
        for key in ["{band_strong}", "{band_related}", "{band_weak}", "{band_unrelated}", "{labels}", "{target}"] {
            assert!(RELEVANCE_TEMPLATE.contains(key), "{key}");
        }
    }
}
