//! Scenario × policy × seed grids, run in parallel, with CSV summaries.
//!
//! A batch manifest is JSON:
//!
//! ```json
//! {
//!   "version": 1,
//!   "scenarios": ["scenes/scene_000.json", "scenes/scene_001.json"],
//!   "policies": ["full", "geometric_only"],
//!   "seeds": [1, 2, 3],
//!   "config": "run.toml"
//! }
//! ```
//!
//! Paths are relative to the manifest. `config` is optional.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::run_episode;
use super::metrics::{compute_metrics, EpisodeResult, Metrics};
use super::policy::Policy;
use super::scenario::{LoadedScenario, Scenario};
use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchManifest {
    pub version: u32,
    pub scenarios: Vec<String>,
    pub policies: Vec<Policy>,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
}

impl BatchManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Config(format!(
                "unsupported manifest version {} (expected {MANIFEST_VERSION})",
                self.version
            )));
        }
        if self.scenarios.is_empty() || self.policies.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config(
                "manifest needs at least one scenario, policy and seed".into(),
            ));
        }
        Ok(())
    }

    pub fn scenario_paths(&self, base: &Path) -> Vec<PathBuf> {
        self.scenarios.iter().map(|s| base.join(s)).collect()
    }
}

/// One cell of the grid: a result or the reason it has none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub scenario: String,
    pub policy: Policy,
    pub seed: u64,
    pub target: Option<String>,
    pub result: Option<EpisodeResult>,
    pub error: Option<String>,
}

/// A named scenario, or the error that prevented loading it.
pub type BatchScenario = (String, std::result::Result<LoadedScenario, String>);

pub fn load_scenarios(paths: &[PathBuf]) -> Vec<BatchScenario> {
    paths
        .iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            (name, Scenario::load(p).map_err(|e| e.to_string()))
        })
        .collect()
}

/// Runs every (scenario, policy, seed) combination. Rows come back in that
/// nesting order regardless of scheduling.
pub fn run_batch(scenarios: &[BatchScenario], policies: &[Policy], seeds: &[u64], cfg: &RunConfig) -> Vec<BatchRow> {
    let jobs: Vec<(usize, Policy, u64)> = (0..scenarios.len())
        .flat_map(|s| policies.iter().flat_map(move |&p| seeds.iter().map(move |&seed| (s, p, seed))))
        .collect();
    jobs.par_iter()
        .map(|&(s, policy, seed)| {
            let (name, loaded) = &scenarios[s];
            let (target, result, error) = match loaded {
                Err(e) => (None, None, Some(e.clone())),
                Ok(sc) => match run_episode(sc, policy, cfg, seed, None) {
                    Ok(out) => (out.target, Some(out.result), None),
                    Err(e) => (None, None, Some(e.to_string())),
                },
            };
            BatchRow {
                scenario: name.clone(),
                policy,
                seed,
                target,
                result,
                error,
            }
        })
        .collect()
}

/// Metrics per policy over the rows that produced a result.
pub fn summarize(rows: &[BatchRow]) -> BTreeMap<Policy, Metrics> {
    let mut by: BTreeMap<Policy, Vec<EpisodeResult>> = BTreeMap::new();
    for r in rows {
        if let Some(res) = &r.result {
            by.entry(r.policy).or_default().push(res.clone());
        }
    }
    by.into_iter()
        .filter_map(|(p, rs)| compute_metrics(&rs).ok().map(|m| (p, m)))
        .collect()
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "inf".into()
    }
}

pub fn episodes_csv(rows: &[BatchRow]) -> String {
    let mut s = String::from("scenario,policy,seed,target,success,path_length,oracle_length,steps,termination,spl_term,error\n");
    for r in rows {
        let (succ, p, l, steps, term, spl) = match &r.result {
            Some(x) => (
                x.success.to_string(),
                num(x.path_length),
                num(x.oracle_length),
                x.steps.to_string(),
                format!("{:?}", x.termination),
                num(x.spl_term()),
            ),
            None => Default::default(),
        };
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(
            s,
            "{},{},{},{},{succ},{p},{l},{steps},{term},{spl},{err}",
            r.scenario,
            r.policy,
            r.seed,
            r.target.as_deref().unwrap_or("")
        );
    }
    s
}

pub fn summary_csv(summary: &BTreeMap<Policy, Metrics>) -> String {
    let mut s = String::from("policy,episodes,sr,spl\n");
    for (p, m) in summary {
        let _ = writeln!(s, "{p},{},{},{}", m.episodes, m.sr, m.spl);
    }
    s
}

/// Full against every other policy: absolute values, differences and SPL ratio.
pub fn comparison_csv(summary: &BTreeMap<Policy, Metrics>) -> String {
    let mut s = String::from("baseline,full_sr,baseline_sr,sr_delta,full_spl,baseline_spl,spl_delta,spl_ratio\n");
    let Some(full) = summary.get(&Policy::Full) else {
        return s;
    };
    for (p, m) in summary.iter().filter(|(p, _)| **p != Policy::Full) {
        let ratio = if m.spl > 0.0 { num(full.spl / m.spl) } else { "inf".into() };
        let _ = writeln!(
            s,
            "{p},{},{},{},{},{},{},{ratio}",
            full.sr,
            m.sr,
            full.sr - m.sr,
            full.spl,
            m.spl,
            full.spl - m.spl
        );
    }
    s
}
