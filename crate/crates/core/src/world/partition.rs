//! Uniform sub-region partition of the world.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::world::grid::OccupancyGrid;

pub type RegionId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubRegion {
    pub id: RegionId,
    pub bounds: Rect,
    pub center: Point2,
}

impl SubRegion {
    pub fn contains(&self, p: &Point2) -> bool {
        self.bounds.contains(p)
    }
}

/// Row-major tiling of the world bounds; edge tiles are clipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    bounds: Rect,
    region_size: f64,
    cols: usize,
    rows: usize,
    regions: Vec<SubRegion>,
}

fn tiles(extent: f64, size: f64) -> usize {
    // Absorb representation error so 1.1 / 0.1 does not round up to 12.
    ((extent / size) - 1e-9).ceil().max(1.0) as usize
}

pub fn partition(world: Rect, region_size: f64) -> Result<Partition> {
    if !(region_size > 0.0 && region_size.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "region_size",
            message: format!("must be positive, got {region_size}"),
        });
    }
    if world.is_degenerate() {
        return Err(Error::DegenerateBounds {
            width: world.width(),
            height: world.height(),
        });
    }
    let cols = tiles(world.width(), region_size);
    let rows = tiles(world.height(), region_size);
    let mut regions = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        for c in 0..cols {
            let min = Point2::new(
                world.min.x + c as f64 * region_size,
                world.min.y + r as f64 * region_size,
            );
            let max = Point2::new(
                (min.x + region_size).min(world.max.x),
                (min.y + region_size).min(world.max.y),
            );
            let bounds = Rect::new(min, max);
            regions.push(SubRegion {
                id: r * cols + c,
                center: bounds.center(),
                bounds,
            });
        }
    }
    Ok(Partition {
        bounds: world,
        region_size,
        cols,
        rows,
        regions,
    })
}

impl Partition {
    pub fn regions(&self) -> &[SubRegion] {
        &self.regions
    }

    pub fn region(&self, id: RegionId) -> &SubRegion {
        &self.regions[id]
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.cols, self.rows)
    }

    pub fn region_size(&self) -> f64 {
        self.region_size
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    /// Region containing `p`; points on the far world edge belong to the last tile.
    pub fn region_at(&self, p: Point2) -> Option<RegionId> {
        let b = &self.bounds;
        if p.x < b.min.x || p.y < b.min.y || p.x > b.max.x || p.y > b.max.y {
            return None;
        }
        let c = (((p.x - b.min.x) / self.region_size).floor() as usize).min(self.cols - 1);
        let r = (((p.y - b.min.y) / self.region_size).floor() as usize).min(self.rows - 1);
        Some(r * self.cols + c)
    }

    /// Grid cells whose centers fall inside region `id`, ascending.
    pub fn region_cells(&self, grid: &OccupancyGrid, id: RegionId) -> Vec<usize> {
        let b = self.regions[id].bounds;
        let o = grid.origin();
        let cs = grid.cell_size();
        let lo = |v: f64, o: f64| (((v - o) / cs).floor() - 1.0).max(0.0) as usize;
        let hi = |v: f64, o: f64, n: usize| ((((v - o) / cs).ceil() + 1.0).max(0.0) as usize).min(n);
        let mut out = Vec::new();
        for iy in lo(b.min.y, o.y)..hi(b.max.y, o.y, grid.height()) {
            for ix in lo(b.min.x, o.x)..hi(b.max.x, o.x, grid.width()) {
                let c = grid.id(ix, iy);
                if self.region_at(grid.center(c)) == Some(id) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Region of every grid cell, assigned by cell center.
    pub fn cell_regions(&self, grid: &OccupancyGrid) -> Vec<RegionId> {
        (0..grid.len())
            .map(|id| {
                self.region_at(grid.center(id))
                    .expect("grid cells lie inside the partitioned bounds")
            })
            .collect()
    }
}
