//! Run configuration (TOML).
//!
//! Every section is optional and falls back to its defaults; `version` is
//! required and unknown keys are rejected. See [`PROVENANCE`] for where each
//! default comes from.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coverage::{CoverageConfig, FovModel};
use crate::error::{Error, Result};
use crate::region::EvaluatorConfig;
use crate::relevance::{BandPoint, BandTable, CacheConfig};
use crate::semantic_buffer::BufferConfig;
use crate::sim::{DetectorConfig, GeneratorConfig};
use crate::viewpoint::SamplerConfig;
use crate::world::SensorModel;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    /// Sub-region edge, meters.
    pub region_size: f64,
    /// Range sensor that reveals occupancy (omnidirectional).
    pub lidar: SensorModel,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            region_size: 4.0,
            lidar: SensorModel::omni(4.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    /// Deterministic co-occurrence table.
    #[default]
    Mock,
    /// HTTP endpoint from `SEMNAV_LLM_URL`; falls back to the mock on failure.
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    #[default]
    Household,
    /// Every pair unrelated.
    AllUnrelated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelevanceConfig {
    pub backend: BackendKind,
    pub table: TableKind,
    pub band_point: BandPoint,
    pub bands: BandTable,
    pub cache: CacheConfig,
    /// Remote request timeout, seconds.
    pub timeout: f64,
}

impl Default for RelevanceConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Mock,
            table: TableKind::Household,
            band_point: BandPoint::Midpoint,
            bands: BandTable::default(),
            cache: CacheConfig::default(),
            timeout: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Planning cycles happen at least this often (steps).
    pub replan_every: usize,
    /// Meters per second; one step moves one cell.
    pub speed: f64,
    /// Overrides the scenario's value when set.
    pub success_distance: Option<f64>,
    /// Overrides the scenario's value when set.
    pub max_steps: Option<usize>,
    /// Write the full plan (viewpoints, points, bitmaps) into trace records.
    pub verbose_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            replan_every: 5,
            speed: 0.5,
            success_distance: None,
            max_steps: None,
            verbose_trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub world: WorldConfig,
    #[serde(default)]
    pub buffer: BufferConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub evaluator: EvaluatorConfig,
    #[serde(default)]
    pub coverage: CoverageConfig,
    #[serde(default)]
    pub relevance: RelevanceConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub generator: GeneratorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            world: WorldConfig::default(),
            buffer: BufferConfig::default(),
            sampler: SamplerConfig::default(),
            evaluator: EvaluatorConfig::default(),
            coverage: CoverageConfig::default(),
            relevance: RelevanceConfig::default(),
            detector: DetectorConfig::default(),
            sim: SimConfig::default(),
            generator: GeneratorConfig::default(),
        }
    }
}

impl RunConfig {
    /// Cheaper sampling and weights sized for the small generated scenes, used
    /// by the ablation batch. Objects are recognised within 2 m while the
    /// lidar maps out to 3 m.
    pub fn desk_scale() -> Self {
        let d = Self::default();
        Self {
            world: WorldConfig {
                region_size: 3.0,
                lidar: SensorModel::omni(3.0),
            },
            sampler: SamplerConfig {
                samples_per_region: 12,
                density_radius: 1.5,
                lambda1: 0.02,
                lambda2: 0.5,
                sensor: SensorModel::omni(3.0),
                keep_k: 3,
            },
            evaluator: EvaluatorConfig {
                r_xy: 1.5,
                ..d.evaluator
            },
            coverage: CoverageConfig {
                fov: FovModel {
                    radius: 2.0,
                    ..d.coverage.fov
                },
                ..d.coverage
            },
            sim: SimConfig {
                verbose_trace: false,
                ..d.sim
            },
            ..d
        }
    }
}

/// Where each default comes from: `method` values are fixed by the navigation
/// method itself, `hardware` values mirror the reference camera, and `chosen`
/// values are tunables picked for the gridworld.
pub const PROVENANCE: &[(&str, &str)] = &[
    ("world.region_size", "chosen"),
    ("world.lidar", "chosen"),
    ("buffer.window_duration", "chosen"),
    ("buffer.capacity", "chosen"),
    ("buffer.hash_cell", "chosen"),
    ("buffer.alpha", "chosen"),
    ("buffer.i_target_floor", "chosen"),
    ("sampler.samples_per_region", "chosen"),
    ("sampler.density_radius", "chosen"),
    ("sampler.lambda1", "chosen"),
    ("sampler.lambda2", "chosen"),
    ("sampler.sensor", "chosen"),
    ("sampler.keep_k", "chosen"),
    ("evaluator.r_xy", "chosen"),
    ("evaluator.sigma", "method (r_xy / sqrt 2)"),
    ("evaluator.activation_threshold", "chosen"),
    ("evaluator.phase1_relevance_threshold", "chosen"),
    ("evaluator.truncate_3sigma", "chosen"),
    ("evaluator.semantic_sum", "chosen"),
    ("coverage.n", "chosen"),
    ("coverage.fov.radius", "chosen"),
    ("coverage.fov.angle", "hardware (87 deg horizontal FOV)"),
    ("coverage.fov.min_displacement", "chosen"),
    ("coverage.fov.occlusion", "chosen"),
    ("coverage.tau", "chosen"),
    ("relevance.bands", "chosen"),
    ("relevance.cache.capacity", "chosen"),
    ("relevance.cache.ttl", "method (24 h)"),
    ("relevance.timeout", "chosen"),
    ("detector", "chosen"),
    ("sim", "chosen"),
    ("generator", "chosen"),
];

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if !(self.world.region_size > 0.0) {
            return Err(Error::InvalidParameter {
                name: "world.region_size",
                message: "must be > 0".into(),
            });
        }
        if !(self.world.lidar.range > 0.0) {
            return Err(Error::InvalidParameter {
                name: "world.lidar.range",
                message: "must be > 0".into(),
            });
        }
        if self.sim.replan_every == 0 || !(self.sim.speed > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sim",
                message: "replan_every and speed must be positive".into(),
            });
        }
        self.buffer.validate()?;
        self.sampler.validate()?;
        self.evaluator.validate()?;
        self.coverage.validate()?;
        self.relevance.bands.validate()?;
        self.detector.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => Error::Config(format!("{}: {other}", path.display())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let c = RunConfig::from_toml("version = 1\n").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml(), c.to_toml());
        let d = RunConfig::desk_scale();
        assert_eq!(RunConfig::from_toml(&d.to_toml()).unwrap(), d);
    }

    #[test]
    fn version_is_mandatory() {
        assert!(RunConfig::from_toml("[sim]\nreplan_every = 3\n").is_err());
        assert!(RunConfig::from_toml("version = 2\n").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let err = RunConfig::from_toml("version = 1\n\n[sampler]\nlambda3 = 1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lambda3"), "{msg}");
        assert!(msg.contains("line 4"), "{msg}");
    }

    #[test]
    fn partial_sections_merge_with_defaults() {
        let c = RunConfig::from_toml("version = 1\n[coverage]\ntau = 0.5\n").unwrap();
        assert_eq!(c.coverage.tau, 0.5);
        assert_eq!(c.coverage.n, 16);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_toml("version = 1\n[coverage]\ntau = 1.5\n").is_err());
        assert!(RunConfig::from_toml("version = 1\n[buffer]\ni_target_floor = 0.0\n").is_err());
    }
}
