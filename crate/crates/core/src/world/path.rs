//! 8-connected shortest paths (A* for point-to-point, Dijkstra fields for one-to-many).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::world::grid::{CellState, OccupancyGrid, PathMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// Cell ids from start to goal inclusive.
    pub cells: Vec<usize>,
    /// Metric length in meters.
    pub cost: f64,
}

impl Path {
    pub fn is_trivial(&self) -> bool {
        self.cells.len() <= 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoPath;

/// Heap entry ordered so the max-heap pops (lowest key, then lowest cell id).
#[derive(Clone, Copy)]
struct Open {
    key: f64,
    cell: usize,
}

impl PartialEq for Open {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Open {
    fn cmp(&self, o: &Self) -> Ordering {
        o.key
            .total_cmp(&self.key)
            .then_with(|| o.cell.cmp(&self.cell))
    }
}

fn endpoint(grid: &OccupancyGrid, p: Point2, which: &'static str) -> Result<usize> {
    let id = grid
        .cell_at(p)
        .ok_or(Error::OutOfBounds { x: p.x, y: p.y })?;
    if grid.truth(id) == CellState::Occupied {
        return Err(Error::BlockedEndpoint {
            which,
            x: p.x,
            y: p.y,
        });
    }
    Ok(id)
}

fn octile(grid: &OccupancyGrid, a: usize, b: usize) -> f64 {
    let (ax, ay) = grid.coords(a);
    let (bx, by) = grid.coords(b);
    let dx = ax.abs_diff(bx) as f64;
    let dy = ay.abs_diff(by) as f64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo + std::f64::consts::SQRT_2 * lo) * grid.cell_size()
}

/// Minimal-cost path between the cells containing `a` and `b`.
///
/// The start cell is always expandable (the robot stands there); every other
/// cell on the path must be traversable under `mode`. Errors if either endpoint
/// is outside the map or inside an occupied cell.
pub fn shortest_path(
    grid: &OccupancyGrid,
    a: Point2,
    b: Point2,
    mode: PathMode,
) -> Result<Result<Path, NoPath>> {
    let start = endpoint(grid, a, "start")?;
    let goal = endpoint(grid, b, "goal")?;
    Ok(astar_cells(grid, start, goal, mode))
}

pub fn astar_cells(
    grid: &OccupancyGrid,
    start: usize,
    goal: usize,
    mode: PathMode,
) -> Result<Path, NoPath> {
    if start == goal {
        return Ok(Path {
            cells: vec![start],
            cost: 0.0,
        });
    }
    if !grid.is_traversable(goal, mode) {
        return Err(NoPath);
    }
    let n = grid.len();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut nbrs = Vec::with_capacity(8);
    g[start] = 0.0;
    heap.push(Open {
        key: octile(grid, start, goal),
        cell: start,
    });
    while let Some(Open { cell, .. }) = heap.pop() {
        if closed[cell] {
            continue;
        }
        if cell == goal {
            return Ok(Path {
                cells: unwind(&parent, start, goal),
                cost: g[goal],
            });
        }
        closed[cell] = true;
        grid.neighbors(cell, mode, &mut nbrs);
        for &(nb, step) in &nbrs {
            if closed[nb] {
                continue;
            }
            let cand = g[cell] + step;
            if cand < g[nb] {
                g[nb] = cand;
                parent[nb] = cell;
                heap.push(Open {
                    key: cand + octile(grid, nb, goal),
                    cell: nb,
                });
            }
        }
    }
    Err(NoPath)
}

fn unwind(parent: &[usize], start: usize, goal: usize) -> Vec<usize> {
    let mut cells = vec![goal];
    let mut c = goal;
    while c != start {
        c = parent[c];
        cells.push(c);
    }
    cells.reverse();
    cells
}

/// Single-source distances over the whole grid.
#[derive(Debug, Clone)]
pub struct DistanceField {
    source: usize,
    dist: Vec<f64>,
    parent: Vec<usize>,
}

impl DistanceField {
    pub fn compute(grid: &OccupancyGrid, source: usize, mode: PathMode) -> Self {
        let n = grid.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        let mut nbrs = Vec::with_capacity(8);
        dist[source] = 0.0;
        heap.push(Open {
            key: 0.0,
            cell: source,
        });
        while let Some(Open { key, cell }) = heap.pop() {
            if done[cell] || key > dist[cell] {
                continue;
            }
            done[cell] = true;
            grid.neighbors(cell, mode, &mut nbrs);
            for &(nb, step) in &nbrs {
                let cand = key + step;
                if cand < dist[nb] {
                    dist[nb] = cand;
                    parent[nb] = cell;
                    heap.push(Open { key: cand, cell: nb });
                }
            }
        }
        Self {
            source,
            dist,
            parent,
        }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn distance(&self, cell: usize) -> f64 {
        self.dist[cell]
    }

    pub fn reachable(&self, cell: usize) -> bool {
        self.dist[cell].is_finite()
    }

    pub fn path_to(&self, cell: usize) -> Option<Path> {
        if !self.reachable(cell) {
            return None;
        }
        Some(Path {
            cells: unwind(&self.parent, self.source, cell),
            cost: self.dist[cell],
        })
    }

    /// Reachable cell minimising distance among those accepted by `pred`
    /// (ties: lower cell id).
    pub fn nearest<P: Fn(usize) -> bool>(&self, pred: P) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (cell, &d) in self.dist.iter().enumerate() {
            if d.is_finite() && pred(cell) && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, cell));
            }
        }
        best.map(|(_, c)| c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_path_is_zero_length() {
        let g = OccupancyGrid::open(3, 3, 0.5).unwrap();
        let p = shortest_path(&g, Point2::new(0.7, 0.7), Point2::new(0.6, 0.9), PathMode::GroundTruth)
            .unwrap()
            .unwrap();
        assert_eq!(p.cost, 0.0);
        assert_eq!(p.cells.len(), 1);
    }

    #[test]
    fn straight_corridor_length() {
        let g = OccupancyGrid::parse_raster("10 1 0.5\n..........\n").unwrap();
        let p = shortest_path(&g, Point2::new(0.25, 0.25), Point2::new(4.75, 0.25), PathMode::GroundTruth)
            .unwrap()
            .unwrap();
        assert!((p.cost - 4.5).abs() < 1e-12);
        assert_eq!(p.cells.len(), 10);
    }

    #[test]
    fn disconnected_is_no_path_and_blocked_is_error() {
        let g = OccupancyGrid::parse_raster("3 1 1\n.#.\n").unwrap();
        let r = shortest_path(&g, Point2::new(0.5, 0.5), Point2::new(2.5, 0.5), PathMode::GroundTruth).unwrap();
        assert_eq!(r, Err(NoPath));
        let e = shortest_path(&g, Point2::new(1.5, 0.5), Point2::new(2.5, 0.5), PathMode::GroundTruth);
        assert!(matches!(e, Err(Error::BlockedEndpoint { which: "start", .. })));
    }

    #[test]
    fn known_free_mode_needs_observation() {
        let mut g = OccupancyGrid::open(4, 1, 1.0).unwrap();
        let (a, b) = (Point2::new(0.5, 0.5), Point2::new(3.5, 0.5));
        assert_eq!(shortest_path(&g, a, b, PathMode::KnownFreeOnly).unwrap(), Err(NoPath));
        g.observe_all();
        let p = shortest_path(&g, a, b, PathMode::KnownFreeOnly).unwrap().unwrap();
        assert!((p.cost - 3.0).abs() < 1e-12);
    }

    #[test]
    fn field_matches_astar() {
        let g = OccupancyGrid::parse_raster("6 4 1\n......\n.####.\n......\n...#..\n").unwrap();
        let src = g.id(0, 0);
        let f = DistanceField::compute(&g, src, PathMode::GroundTruth);
        for c in 0..g.len() {
            match astar_cells(&g, src, c, PathMode::GroundTruth) {
                Ok(p) => assert!((p.cost - f.distance(c)).abs() < 1e-9),
                Err(NoPath) => assert!(!f.reachable(c)),
            }
        }
        let p = f.path_to(g.id(5, 3)).unwrap();
        assert_eq!(p.cells.first(), Some(&src));
    }
}
