//! Scenario files.
//!
//! A scenario is a JSON object:
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "office_a",
//!   "map_file": "office_a.map",
//!   "objects": [{"label": "monitor", "x": 3.1, "y": 4.2}],
//!   "start": {"x": 1.0, "y": 1.0, "heading": 0.0},
//!   "instruction": "Help me find the monitor",
//!   "success_distance": 1.0,
//!   "max_steps": 400,
//!   "seed": 7
//! }
//! ```
//!
//! `map_file` is resolved relative to the scenario file. A raster may be given
//! inline as `map` instead. `start` is optional; when absent a free start cell is
//! drawn from the episode seed. `z` on objects defaults to 0.

use std::path::{Path as FsPath, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3, Pose};
use crate::viewpoint::mix_seed;
use crate::world::{CellState, OccupancyGrid};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub label: String,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub z: f64,
}

impl SceneObject {
    pub fn new(label: &str, x: f64, y: f64) -> Self {
        Self {
            label: label.into(),
            x,
            y,
            z: 0.0,
        }
    }

    pub fn planar(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn position(&self) -> Point3 {
        Point3::new(self.x, self.y, self.z)
    }
}

fn default_success_distance() -> f64 {
    1.0
}

fn default_max_steps() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    pub objects: Vec<SceneObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Pose>,
    pub instruction: String,
    #[serde(default = "default_success_distance")]
    pub success_distance: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub seed: u64,
}

/// A scenario with its map resolved and parsed.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub grid: OccupancyGrid,
}

impl Scenario {
    pub fn from_json(text: &str, origin: &FsPath) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json {
            path: origin.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_VERSION {
            return Err(Error::Scenario(format!(
                "unsupported version {} (expected {SCENARIO_VERSION})",
                self.version
            )));
        }
        if !(self.success_distance > 0.0) {
            return Err(Error::Scenario("success_distance must be > 0".into()));
        }
        if self.map.is_some() == self.map_file.is_some() {
            return Err(Error::Scenario("exactly one of `map` and `map_file` is required".into()));
        }
        Ok(())
    }

    /// Reads a scenario file and its map.
    pub fn load(path: impl AsRef<FsPath>) -> Result<LoadedScenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scenario = Self::from_json(&text, path)?;
        scenario.validate()?;
        let base = path.parent().unwrap_or(FsPath::new("."));
        scenario.resolve(base)
    }

    /// Resolves the map relative to `base`.
    pub fn resolve(self, base: &FsPath) -> Result<LoadedScenario> {
        let raster = match (&self.map, &self.map_file) {
            (Some(inline), _) => inline.clone(),
            (None, Some(file)) => {
                let p: PathBuf = base.join(file);
                std::fs::read_to_string(&p).map_err(|e| Error::io(p, e))?
            }
            (None, None) => return Err(Error::Scenario("no map given".into())),
        };
        let grid = OccupancyGrid::parse_raster(&raster)?;
        let loaded = LoadedScenario { scenario: self, grid };
        loaded.check_start()?;
        Ok(loaded)
    }
}

impl LoadedScenario {
    pub fn from_parts(scenario: Scenario, grid: OccupancyGrid) -> Result<Self> {
        let l = Self { scenario, grid };
        l.check_start()?;
        Ok(l)
    }

    fn check_start(&self) -> Result<()> {
        if let Some(s) = &self.scenario.start {
            let p = s.position();
            let cell = self
                .grid
                .cell_at(p)
                .ok_or(Error::OutOfBounds { x: p.x, y: p.y })?;
            if self.grid.truth(cell) != CellState::Free {
                return Err(Error::BlockedEndpoint {
                    which: "start",
                    x: p.x,
                    y: p.y,
                });
            }
        }
        for o in &self.scenario.objects {
            if self.grid.cell_at(o.planar()).is_none() {
                return Err(Error::OutOfBounds { x: o.x, y: o.y });
            }
        }
        Ok(())
    }

    /// Start pose snapped to its cell center. Without an explicit start, a free
    /// cell farther than twice `success_distance` from every object is drawn from
    /// `seed` (any free cell if none qualifies).
    pub fn start_pose(&self, seed: u64) -> Pose {
        let g = &self.grid;
        if let Some(s) = &self.scenario.start {
            let c = g.center(g.cell_at(s.position()).expect("checked on load"));
            return Pose::new(c.x, c.y, s.heading);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x57A7));
        let free: Vec<usize> = (0..g.len()).filter(|&c| g.truth(c) == CellState::Free).collect();
        let far: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&c| {
                let p = g.center(c);
                self.scenario
                    .objects
                    .iter()
                    .all(|o| o.planar().dist(&p) > 2.0 * self.scenario.success_distance)
            })
            .collect();
        let pool = if far.is_empty() { &free } else { &far };
        let cell = pool[rng.random_range(0..pool.len())];
        let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let c = g.center(cell);
        Pose::new(c.x, c.y, heading)
    }
}
