//! Occupancy grid with a ground-truth layer and a monotone observation ledger.
//!
//! # Raster format
//!
//! Ground-truth maps are stored as plain text:
//!
//! ```text
//! 6 3 0.5
//! ######
//! #....#
//! ######
//! ```
//!
//! The first non-comment line is `width height cell_size` (cells, cells, meters).
//! It is followed by exactly `height` rows of exactly `width` characters, `#` for
//! an occupied cell and `.` for a free one. Rows are listed top to bottom, so the
//! first row is the one with the largest `y`. The grid origin (lower-left corner
//! of cell `(0, 0)`) is at world `(0, 0)`. Lines starting with `;` are comments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

/// Which cells a planner may traverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathMode {
    /// Only cells that have been observed and are free.
    KnownFreeOnly,
    /// The true map; used for oracle shortest paths.
    GroundTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    origin: Point2,
    cell_size: f64,
    width: usize,
    height: usize,
    truth: Vec<CellState>,
    cells: Vec<CellState>,
    observed: Vec<bool>,
    observed_count: usize,
}

impl OccupancyGrid {
    /// Builds a grid from a ground-truth occupancy mask (row-major, `iy * width + ix`).
    pub fn from_truth(
        width: usize,
        height: usize,
        cell_size: f64,
        origin: Point2,
        occupied: &[bool],
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateBounds {
                width: width as f64,
                height: height as f64,
            });
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "cell_size",
                message: format!("must be positive, got {cell_size}"),
            });
        }
        if occupied.len() != width * height {
            return Err(Error::InvalidParameter {
                name: "occupied",
                message: format!("expected {} cells, got {}", width * height, occupied.len()),
            });
        }
        let truth = occupied
            .iter()
            .map(|&o| if o { CellState::Occupied } else { CellState::Free })
            .collect();
        Ok(Self {
            origin,
            cell_size,
            width,
            height,
            truth,
            cells: vec![CellState::Unknown; width * height],
            observed: vec![false; width * height],
            observed_count: 0,
        })
    }

    /// An all-free grid.
    pub fn open(width: usize, height: usize, cell_size: f64) -> Result<Self> {
        Self::from_truth(
            width,
            height,
            cell_size,
            Point2::default(),
            &vec![false; width * height],
        )
    }

    pub fn parse_raster(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.starts_with(';'));

        let (hline, header) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or(Error::MapFormat {
                line: 1,
                message: "missing `width height cell_size` header".into(),
            })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::MapFormat {
                line: hline,
                message: format!("header needs 3 fields, found {}", fields.len()),
            });
        }
        let bad = |what: &str, v: &str| Error::MapFormat {
            line: hline,
            message: format!("invalid {what} {v:?}"),
        };
        let width: usize = fields[0].parse().map_err(|_| bad("width", fields[0]))?;
        let height: usize = fields[1].parse().map_err(|_| bad("height", fields[1]))?;
        let cell_size: f64 = fields[2].parse().map_err(|_| bad("cell_size", fields[2]))?;
        if width == 0 || height == 0 {
            return Err(Error::MapFormat {
                line: hline,
                message: "width and height must be at least 1".into(),
            });
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(bad("cell_size", fields[2]));
        }

        let mut occupied = vec![false; width * height];
        let mut row = 0;
        let mut last_line = hline;
        for (lineno, line) in lines {
            last_line = lineno;
            if line.is_empty() && row == height {
                continue;
            }
            if row == height {
                return Err(Error::MapFormat {
                    line: lineno,
                    message: format!("more than {height} rows"),
                });
            }
            let chars: Vec<char> = line.chars().collect();
            if chars.len() != width {
                return Err(Error::MapFormat {
                    line: lineno,
                    message: format!("row has {} cells, expected {width}", chars.len()),
                });
            }
            let iy = height - 1 - row;
            for (ix, c) in chars.into_iter().enumerate() {
                occupied[iy * width + ix] = match c {
                    '#' => true,
                    '.' => false,
                    other => {
                        return Err(Error::MapFormat {
                            line: lineno,
                            message: format!("unexpected character {other:?} at column {}", ix + 1),
                        })
                    }
                };
            }
            row += 1;
        }
        if row != height {
            return Err(Error::MapFormat {
                line: last_line,
                message: format!("expected {height} rows, found {row}"),
            });
        }
        Self::from_truth(width, height, cell_size, Point2::default(), &occupied)
    }

    /// Serializes the ground-truth layer in the raster format.
    pub fn to_raster(&self) -> String {
        let mut out = format!("{} {} {}\n", self.width, self.height, self.cell_size);
        for iy in (0..self.height).rev() {
            for ix in 0..self.width {
                out.push(if self.truth[self.id(ix, iy)] == CellState::Occupied {
                    '#'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(
            self.origin,
            Point2::new(
                self.origin.x + self.width as f64 * self.cell_size,
                self.origin.y + self.height as f64 * self.cell_size,
            ),
        )
    }

    #[inline]
    pub fn id(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    #[inline]
    pub fn coords(&self, id: usize) -> (usize, usize) {
        (id % self.width, id / self.width)
    }

    /// Cell containing `p`, or `None` outside the grid.
    pub fn cell_at(&self, p: Point2) -> Option<usize> {
        let gx = ((p.x - self.origin.x) / self.cell_size).floor();
        let gy = ((p.y - self.origin.y) / self.cell_size).floor();
        if gx < 0.0 || gy < 0.0 || gx >= self.width as f64 || gy >= self.height as f64 {
            return None;
        }
        Some(self.id(gx as usize, gy as usize))
    }

    pub fn center(&self, id: usize) -> Point2 {
        let (ix, iy) = self.coords(id);
        Point2::new(
            self.origin.x + (ix as f64 + 0.5) * self.cell_size,
            self.origin.y + (iy as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn truth(&self, id: usize) -> CellState {
        self.truth[id]
    }

    /// Believed state: `Unknown` until the cell is observed.
    pub fn state(&self, id: usize) -> CellState {
        self.cells[id]
    }

    pub fn is_observed(&self, id: usize) -> bool {
        self.observed[id]
    }

    pub fn observed_count(&self) -> usize {
        self.observed_count
    }

    /// Marks a cell observed and copies its true state. Returns `true` if the
    /// observed flag flipped.
    pub fn observe(&mut self, id: usize) -> bool {
        if self.observed[id] {
            return false;
        }
        self.observed[id] = true;
        self.cells[id] = self.truth[id];
        self.observed_count += 1;
        true
    }

    pub fn observe_all(&mut self) {
        for id in 0..self.len() {
            self.observe(id);
        }
    }

    pub fn is_traversable(&self, id: usize, mode: PathMode) -> bool {
        match mode {
            PathMode::GroundTruth => self.truth[id] == CellState::Free,
            PathMode::KnownFreeOnly => self.cells[id] == CellState::Free,
        }
    }

    /// Observed free cell with at least one unobserved 4-neighbour.
    pub fn is_frontier(&self, id: usize) -> bool {
        if self.cells[id] != CellState::Free {
            return false;
        }
        let (ix, iy) = self.coords(id);
        let (w, h) = (self.width, self.height);
        (ix > 0 && !self.observed[id - 1])
            || (ix + 1 < w && !self.observed[id + 1])
            || (iy > 0 && !self.observed[id - w])
            || (iy + 1 < h && !self.observed[id + w])
    }

    /// 8-connected moves out of `id` under `mode`, with their metric cost.
    /// Diagonal moves require both adjacent orthogonal cells to be traversable.
    pub fn neighbors(&self, id: usize, mode: PathMode, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let (ix, iy) = self.coords(id);
        let (ix, iy) = (ix as isize, iy as isize);
        let cs = self.cell_size;
        let diag = std::f64::consts::SQRT_2 * cs;
        let ok = |x: isize, y: isize| -> Option<usize> {
            if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
                return None;
            }
            let n = self.id(x as usize, y as usize);
            self.is_traversable(n, mode).then_some(n)
        };
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if let Some(n) = ok(ix + dx, iy + dy) {
                out.push((n, cs));
            }
        }
        for (dx, dy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            if ok(ix + dx, iy).is_some() && ok(ix, iy + dy).is_some() {
                if let Some(n) = ok(ix + dx, iy + dy) {
                    out.push((n, diag));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "; tiny\n6 3 0.5\n######\n#...##\n######\n";

    #[test]
    fn raster_round_trip() {
        let g = OccupancyGrid::parse_raster(SMALL).unwrap();
        assert_eq!((g.width(), g.height()), (6, 3));
        assert_eq!(g.truth(g.id(1, 1)), CellState::Free);
        assert_eq!(g.truth(g.id(4, 1)), CellState::Occupied);
        let again = OccupancyGrid::parse_raster(&g.to_raster()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn first_row_is_top() {
        let g = OccupancyGrid::parse_raster("2 2 1\n#.\n..\n").unwrap();
        assert_eq!(g.truth(g.id(0, 1)), CellState::Occupied);
        assert_eq!(g.truth(g.id(0, 0)), CellState::Free);
    }

    #[test]
    fn raster_errors_carry_line_numbers() {
        let err = OccupancyGrid::parse_raster("3 2 0.1\n...\n.x.\n").unwrap_err();
        assert!(matches!(err, Error::MapFormat { line: 3, .. }), "{err}");
        let err = OccupancyGrid::parse_raster("3 2 0.1\n...\n").unwrap_err();
        assert!(matches!(err, Error::MapFormat { .. }));
        let err = OccupancyGrid::parse_raster("3 2 -1\n...\n...\n").unwrap_err();
        assert!(matches!(err, Error::MapFormat { line: 1, .. }));
        let err = OccupancyGrid::parse_raster("3 2 0.1\n..\n...\n").unwrap_err();
        assert!(matches!(err, Error::MapFormat { line: 2, .. }));
    }

    #[test]
    fn observation_is_monotone_and_copies_truth() {
        let mut g = OccupancyGrid::parse_raster(SMALL).unwrap();
        let id = g.id(0, 0);
        assert_eq!(g.state(id), CellState::Unknown);
        assert!(g.observe(id));
        assert!(!g.observe(id));
        assert_eq!(g.state(id), CellState::Occupied);
        assert_eq!(g.observed_count(), 1);
    }

    #[test]
    fn diagonal_moves_do_not_cut_corners() {
        // . #
        // . .
        let g = OccupancyGrid::parse_raster("2 2 1\n.#\n..\n").unwrap();
        let mut out = Vec::new();
        g.neighbors(g.id(0, 0), PathMode::GroundTruth, &mut out);
        let ids: Vec<usize> = out.iter().map(|&(n, _)| n).collect();
        assert!(ids.contains(&g.id(1, 0)));
        assert!(ids.contains(&g.id(0, 1)));
        assert!(!ids.contains(&g.id(1, 1)));
    }

    #[test]
    fn cell_lookup_respects_bounds() {
        let g = OccupancyGrid::open(4, 4, 0.5).unwrap();
        assert_eq!(g.cell_at(Point2::new(0.0, 0.0)), Some(0));
        assert_eq!(g.cell_at(Point2::new(1.99, 0.1)), Some(3));
        assert_eq!(g.cell_at(Point2::new(2.0, 0.1)), None);
        assert_eq!(g.cell_at(Point2::new(-0.01, 0.1)), None);
    }
}
