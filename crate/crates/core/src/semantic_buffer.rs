//! Sliding-window detection buffer with spatial-hash deduplication, and fusion
//! of buffered detections with relevance scores into a semantic point cloud.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::relevance::LabelSanitizer;
use crate::scalar::Scalar;

/// One detector observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection<T: Scalar = f64> {
    pub label: String,
    pub confidence: T,
    pub position: Point3<T>,
    /// Episode clock, seconds.
    pub timestamp: T,
}

/// A buffered detection after fusion with its relevance score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticPoint<T: Scalar = f64> {
    pub position: Point3<T>,
    pub label: String,
    /// `max(alpha * score, i_target_floor)`.
    pub relevance: T,
    /// Raw relevance score `S_s` the fused value was built from.
    pub score: T,
    /// Detector confidence, kept apart from relevance.
    pub confidence: T,
}

impl<T: Scalar> SemanticPoint<T> {
    /// Counted by the density metric: the scorer judged the label meaningful.
    pub fn is_valid(&self) -> bool {
        self.score > T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BufferConfig<T: Scalar = f64> {
    /// Seconds a detection stays in the window.
    pub window_duration: T,
    /// Max number of occupied hash cells.
    pub capacity: usize,
    /// Hash cell edge in meters.
    pub hash_cell: T,
    pub alpha: T,
    pub i_target_floor: T,
}

impl<T: Scalar> Default for BufferConfig<T> {
    fn default() -> Self {
        Self {
            window_duration: T::of(30.0),
            capacity: 4096,
            hash_cell: T::of(0.1),
            alpha: T::one(),
            i_target_floor: T::of(0.05),
        }
    }
}

impl<T: Scalar> BufferConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, message: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    message: message.to_string(),
                })
            }
        };
        check(self.hash_cell > T::zero(), "hash_cell", "must be > 0")?;
        check(self.i_target_floor > T::zero(), "i_target_floor", "must be > 0")?;
        check(self.alpha > T::zero(), "alpha", "must be > 0")?;
        check(self.window_duration >= T::zero(), "window_duration", "must be >= 0")?;
        check(self.capacity > 0, "capacity", "must be > 0")
    }
}

/// Hash key `(⌊x/cell⌋, ⌊y/cell⌋)`.
pub fn spatial_key<T: Scalar>(x: T, y: T, hash_cell: T) -> (i64, i64) {
    let ix = (x / hash_cell).floor().to_i64().unwrap_or(i64::MAX);
    let iy = (y / hash_cell).floor().to_i64().unwrap_or(i64::MAX);
    (ix, iy)
}

#[derive(Debug, Clone)]
pub struct SemanticBuffer<T: Scalar = f64> {
    cfg: BufferConfig<T>,
    sanitizer: LabelSanitizer,
    /// Keyed `(iy, ix)` so iteration is already in output order. Each cell keeps
    /// the detections no other one beats on both confidence and recency,
    /// oldest first, so its first entry is the best one still in the window.
    cells: BTreeMap<(i64, i64), Vec<Detection<T>>>,
    clock: Option<T>,
    dropped: usize,
}

impl<T: Scalar> SemanticBuffer<T> {
    pub fn new(cfg: BufferConfig<T>, sanitizer: LabelSanitizer) -> Self {
        Self {
            cfg,
            sanitizer,
            cells: BTreeMap::new(),
            clock: None,
            dropped: 0,
        }
    }

    pub fn config(&self) -> &BufferConfig<T> {
        &self.cfg
    }

    /// Occupied hash cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Detections rejected by sanitization or carrying an invalid confidence.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// The retained detection of each cell, in `(iy, ix)` order.
    pub fn detections(&self) -> impl Iterator<Item = &Detection<T>> {
        self.cells.values().map(|c| &c[0])
    }

    pub fn labels(&self) -> Vec<String> {
        let mut l: Vec<String> = self.detections().map(|d| d.label.clone()).collect();
        l.sort();
        l.dedup();
        l
    }

    pub fn insert(&mut self, mut d: Detection<T>) {
        let Some(label) = self.sanitizer.sanitize_one(&d.label) else {
            self.dropped += 1;
            return;
        };
        if !(d.confidence >= T::zero() && d.confidence <= T::one()) {
            self.dropped += 1;
            return;
        }
        d.label = label;
        let now = match self.clock {
            Some(c) if c > d.timestamp => c,
            _ => d.timestamp,
        };
        self.clock = Some(now);
        self.evict_expired(now);
        if now - d.timestamp > self.cfg.window_duration {
            return;
        }

        let (ix, iy) = spatial_key(d.position.x, d.position.y, self.cfg.hash_cell);
        let key = (iy, ix);
        match self.cells.get_mut(&key) {
            Some(cell) => {
                if cell
                    .iter()
                    .any(|e| e.confidence >= d.confidence && e.timestamp >= d.timestamp)
                {
                    return;
                }
                cell.retain(|e| !(d.confidence >= e.confidence && d.timestamp >= e.timestamp));
                let at = cell.partition_point(|e| e.timestamp < d.timestamp);
                cell.insert(at, d);
            }
            None => {
                self.cells.insert(key, vec![d]);
                while self.cells.len() > self.cfg.capacity {
                    self.evict_oldest();
                }
            }
        }
    }

    /// Drops every detection older than the window relative to `now`.
    pub fn evict_expired(&mut self, now: T) {
        let window = self.cfg.window_duration;
        self.cells.retain(|_, c| {
            c.retain(|d| now - d.timestamp <= window);
            !c.is_empty()
        });
    }

    /// Removes the cell whose latest observation is oldest.
    fn evict_oldest(&mut self) {
        let latest = |c: &Vec<Detection<T>>| c[c.len() - 1].timestamp;
        let oldest = self
            .cells
            .iter()
            .min_by(|a, b| {
                latest(a.1)
                    .partial_cmp(&latest(b.1))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| a.0.cmp(b.0))
            })
            .map(|(k, _)| *k);
        if let Some(k) = oldest {
            self.cells.remove(&k);
        }
    }

    /// Fused point cloud using this buffer's own configuration.
    pub fn fuse(&self, scores: &BTreeMap<String, T>) -> Vec<SemanticPoint<T>> {
        fuse(self, scores, &self.cfg)
    }

    /// Writes one JSON detection per line.
    pub fn dump_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()>
    where
        T: Serialize,
    {
        for d in self.detections() {
            serde_json::to_writer(&mut w, d)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// One point per buffered detection with relevance `max(alpha * S_s, floor)`;
/// labels without a score get `S_s = 0`. Output is ordered by `(iy, ix)`.
pub fn fuse<T: Scalar>(
    buffer: &SemanticBuffer<T>,
    scores: &BTreeMap<String, T>,
    cfg: &BufferConfig<T>,
) -> Vec<SemanticPoint<T>> {
    buffer
        .detections()
        .map(|d| {
            let score = scores.get(&d.label).copied().unwrap_or_else(T::zero);
            SemanticPoint {
                position: d.position,
                label: d.label.clone(),
                relevance: fused_relevance(score, cfg.alpha, cfg.i_target_floor),
                score,
                confidence: d.confidence,
            }
        })
        .collect()
}

#[inline]
pub fn fused_relevance<T: Scalar>(score: T, alpha: T, floor: T) -> T {
    (alpha * score).max(floor)
}
