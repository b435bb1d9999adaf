//! Ray traversal: simulated range sensor and line-of-sight queries.

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Pose};
use crate::world::grid::{CellState, OccupancyGrid};

/// Planar range sensor centred on the pose heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorModel {
    /// Max range in meters.
    pub range: f64,
    /// Total angular span in radians; `2π` for an omnidirectional sensor.
    pub span: f64,
}

impl SensorModel {
    pub fn omni(range: f64) -> Self {
        Self {
            range,
            span: std::f64::consts::TAU,
        }
    }

    pub fn is_omni(&self) -> bool {
        self.span >= std::f64::consts::TAU - 1e-9
    }

    /// Ray angles relative to the heading. Spacing keeps adjacent rays less than
    /// half a cell apart at max range.
    fn ray_offsets(&self, cell_size: f64) -> Vec<f64> {
        let span = self.span.clamp(0.0, std::f64::consts::TAU);
        let n = ((span * self.range / cell_size) * 2.0).ceil().max(16.0) as usize;
        if self.is_omni() {
            let step = std::f64::consts::TAU / n as f64;
            (0..n).map(|k| k as f64 * step).collect()
        } else {
            let step = span / n as f64;
            (0..=n).map(|k| -span / 2.0 + k as f64 * step).collect()
        }
    }
}

/// Walks the cells pierced by a ray, Amanatides–Woo style. `visit` receives each
/// cell id and the distance (meters) at which the ray entered it; returning
/// `false` stops the walk. A ray through an exact cell corner steps diagonally,
/// so cells only touched at that corner are skipped.
pub(crate) fn traverse<F>(grid: &OccupancyGrid, start: Point2, dir: (f64, f64), mut visit: F)
where
    F: FnMut(usize, f64) -> bool,
{
    let cs = grid.cell_size();
    let o = grid.origin();
    let gx = (start.x - o.x) / cs;
    let gy = (start.y - o.y) / cs;
    let (w, h) = (grid.width() as isize, grid.height() as isize);
    let mut ix = gx.floor() as isize;
    let mut iy = gy.floor() as isize;
    if ix < 0 || iy < 0 || ix >= w || iy >= h {
        return;
    }
    let (dx, dy) = dir;
    let step_x: isize = if dx > 0.0 { 1 } else { -1 };
    let step_y: isize = if dy > 0.0 { 1 } else { -1 };
    let delta_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
    let delta_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };
    let mut max_x = if dx > 0.0 {
        (ix as f64 + 1.0 - gx) / dx
    } else if dx < 0.0 {
        (gx - ix as f64) / -dx
    } else {
        f64::INFINITY
    };
    let mut max_y = if dy > 0.0 {
        (iy as f64 + 1.0 - gy) / dy
    } else if dy < 0.0 {
        (gy - iy as f64) / -dy
    } else {
        f64::INFINITY
    };

    // Crossings closer than this (in cells) count as one corner crossing, so
    // rounding cannot slip a ray between two diagonal cells.
    const CORNER_EPS: f64 = 1e-9;
    let mut t = 0.0;
    loop {
        if !visit(grid.id(ix as usize, iy as usize), t * cs) {
            return;
        }
        if (max_x - max_y).abs() <= CORNER_EPS {
            t = max_x.min(max_y);
            if !t.is_finite() {
                return;
            }
            ix += step_x;
            iy += step_y;
            max_x += delta_x;
            max_y += delta_y;
        } else if max_x < max_y {
            t = max_x;
            ix += step_x;
            max_x += delta_x;
        } else {
            t = max_y;
            iy += step_y;
            max_y += delta_y;
        }
        if ix < 0 || iy < 0 || ix >= w || iy >= h {
            return;
        }
    }
}

/// Reusable dedup buffer for sensor sweeps.
#[derive(Debug, Default, Clone)]
pub struct RayScratch {
    stamp: Vec<u32>,
    generation: u32,
}

impl RayScratch {
    fn begin(&mut self, n: usize) {
        if self.stamp.len() != n {
            self.stamp = vec![0; n];
            self.generation = 0;
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
    }

    fn mark(&mut self, id: usize) -> bool {
        if self.stamp[id] == self.generation {
            false
        } else {
            self.stamp[id] = self.generation;
            true
        }
    }
}

/// Cells a sensor at `pose` would see, in first-seen order: along every ray, all
/// cells up to and including the first occupied one (by ground truth).
pub fn sensed_cells(
    grid: &OccupancyGrid,
    pose: &Pose,
    sensor: &SensorModel,
    scratch: &mut RayScratch,
    out: &mut Vec<usize>,
) {
    out.clear();
    scratch.begin(grid.len());
    let start = pose.position();
    for off in sensor.ray_offsets(grid.cell_size()) {
        let a = pose.heading + off;
        traverse(grid, start, (a.cos(), a.sin()), |id, t| {
            if t > sensor.range {
                return false;
            }
            if scratch.mark(id) {
                out.push(id);
            }
            grid.truth(id) != CellState::Occupied
        });
    }
}

/// Simulated sensor update. Returns exactly the cells whose observed flag flipped.
pub fn reveal(grid: &mut OccupancyGrid, pose: &Pose, sensor: &SensorModel) -> Vec<usize> {
    let mut scratch = RayScratch::default();
    reveal_with(grid, pose, sensor, &mut scratch)
}

pub fn reveal_with(
    grid: &mut OccupancyGrid,
    pose: &Pose,
    sensor: &SensorModel,
    scratch: &mut RayScratch,
) -> Vec<usize> {
    let mut seen = Vec::new();
    sensed_cells(grid, pose, sensor, scratch, &mut seen);
    seen.retain(|&id| grid.observe(id));
    seen
}

/// Number of currently unobserved cells a sensor at `pose` would reveal.
pub fn count_unobserved_visible(
    grid: &OccupancyGrid,
    pose: &Pose,
    sensor: &SensorModel,
    scratch: &mut RayScratch,
    buf: &mut Vec<usize>,
) -> usize {
    sensed_cells(grid, pose, sensor, scratch, buf);
    buf.iter().filter(|&&id| !grid.is_observed(id)).count()
}

/// `true` iff no ground-truth occupied cell has interior points on segment `a`–`b`.
pub fn line_of_sight(grid: &OccupancyGrid, a: Point2, b: Point2) -> bool {
    let len = a.dist(&b);
    if len == 0.0 {
        return true;
    }
    let dir = ((b.x - a.x) / len, (b.y - a.y) / len);
    let mut clear = true;
    traverse(grid, a, dir, |id, t| {
        if t >= len {
            return false;
        }
        if grid.truth(id) == CellState::Occupied {
            clear = false;
            return false;
        }
        true
    });
    clear
}
