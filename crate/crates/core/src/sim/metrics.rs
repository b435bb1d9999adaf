//! Per-episode outcomes and SR/SPL aggregation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::world::{DistanceField, OccupancyGrid, PathMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Found,
    StepBudget,
    NoPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    /// Distance travelled by the agent, meters.
    pub path_length: f64,
    /// Ground-truth shortest distance from the start to the success zone;
    /// infinite when the zone is unreachable.
    pub oracle_length: f64,
    pub steps: usize,
    pub termination: Termination,
}

impl EpisodeResult {
    /// `S · l / max(p, l)`.
    pub fn spl_term(&self) -> f64 {
        if !self.success {
            return 0.0;
        }
        let denom = self.path_length.max(self.oracle_length);
        if denom > 0.0 {
            self.oracle_length / denom
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sr: f64,
    pub spl: f64,
    pub episodes: usize,
}

pub fn compute_metrics(results: &[EpisodeResult]) -> Result<Metrics> {
    if results.is_empty() {
        return Err(Error::NoEpisodes);
    }
    let n = results.len() as f64;
    let successes = results.iter().filter(|r| r.success).count() as f64;
    let spl = results.iter().map(EpisodeResult::spl_term).sum::<f64>() / n;
    Ok(Metrics {
        sr: successes / n,
        spl,
        episodes: results.len(),
    })
}

/// Shortest ground-truth path length from `start` to any free cell whose center
/// lies within `radius` of one of `goals`. Infinite when none is reachable.
pub fn oracle_shortest(grid: &OccupancyGrid, start: Point2, goals: &[Point2], radius: f64) -> f64 {
    let Some(s) = grid.cell_at(start) else {
        return f64::INFINITY;
    };
    if goals.iter().any(|g| g.dist(&start) <= radius) {
        return 0.0;
    }
    let field = DistanceField::compute(grid, s, PathMode::GroundTruth);
    (0..grid.len())
        .filter(|&c| field.reachable(c))
        .filter(|&c| {
            let p = grid.center(c);
            goals.iter().any(|g| g.dist(&p) <= radius)
        })
        .map(|c| field.distance(c))
        .fold(f64::INFINITY, f64::min)
}
