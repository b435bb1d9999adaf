//! JSONL episode traces: one header line, one line per step, one result line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::metrics::EpisodeResult;
use super::policy::Policy;
use super::scenario::SceneObject;
use crate::coverage::RegionState;
use crate::geometry::{Point2, Pose, Rect};
use crate::region::RegionScore;
use crate::relevance::DegradationEvent;
use crate::semantic_buffer::{Detection, SemanticPoint};
use crate::viewpoint::Viewpoint;
use crate::world::RegionId;

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub version: u32,
    pub scenario: String,
    pub policy: Policy,
    pub seed: u64,
    pub instruction: String,
    pub target: Option<String>,
    /// Ground-truth raster.
    pub map: String,
    pub objects: Vec<SceneObject>,
    pub regions: Vec<Rect>,
    pub start: Pose,
    pub success_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    /// Heading for a semantic point that passed the phase-one threshold.
    ShortCircuit,
    /// Following a viewpoint route in the top region.
    Region,
    /// Heading for a frontier cell.
    Frontier,
    NoPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub mode: PlanMode,
    pub region_scores: Vec<RegionScore>,
    pub order: Vec<RegionId>,
    pub target_region: Option<RegionId>,
    /// Goal of the plan in world coordinates.
    pub goal: Option<Point2>,
    /// Cell-center polyline from the robot to the last stop.
    pub route: Vec<Point2>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub viewpoints: Vec<Viewpoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<SemanticPoint>,
    /// Hex-encoded coverage bitmaps per region, row-major, low bit first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bitmaps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorySnapshot {
    pub states: Vec<RegionState>,
    pub coverage: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub pose: Pose,
    pub region: RegionId,
    pub revealed: Vec<usize>,
    pub detections: Vec<Detection>,
    pub target_seen: bool,
    pub plan: Option<PlanRecord>,
    pub memory: MemorySnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub result: EpisodeResult,
    pub degradations: Vec<DegradationEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceRecord {
    Header(TraceHeader),
    Step(StepRecord),
    Result(ResultRecord),
}

pub fn write_record<W: Write + ?Sized>(w: &mut W, r: &TraceRecord) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, r)?;
    w.write_all(b"\n")
}

/// Packs a bitmap into hex, four cells per digit.
pub fn bitmap_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | ((b as u32) << i));
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

/// A parsed trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub steps: Vec<StepRecord>,
    pub result: Option<ResultRecord>,
}

impl Trace {
    pub fn read<R: BufRead>(r: R) -> crate::Result<Self> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut result = None;
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| crate::Error::io("<trace>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TraceRecord = serde_json::from_str(&line).map_err(|e| crate::Error::Json {
                path: format!("<trace line {}>", i + 1).into(),
                source: e,
            })?;
            match rec {
                TraceRecord::Header(h) => header = Some(h),
                TraceRecord::Step(s) => steps.push(s),
                TraceRecord::Result(r) => result = Some(r),
            }
        }
        let header = header.ok_or_else(|| crate::Error::Scenario("trace has no header".into()))?;
        Ok(Self { header, steps, result })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> crate::Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| crate::Error::io(path, e))?;
        Self::read(std::io::BufReader::new(f))
    }

    /// Latest plan at or before `frame`.
    pub fn plan_at(&self, frame: usize) -> Option<&PlanRecord> {
        self.steps[..=frame.min(self.steps.len().saturating_sub(1))]
            .iter()
            .rev()
            .find_map(|s| s.plan.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_packing() {
        assert_eq!(bitmap_hex(&[true, false, false, false, false, true, true, true]), "1e");
        assert_eq!(bitmap_hex(&[true; 16]), "ffff");
        assert_eq!(bitmap_hex(&[]), "");
    }
}
