//! Per-region FOV coverage bitmaps and the Inactive/Active/Worthless memory.

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_diff, Point2, Rect};
use crate::scalar::Scalar;
use crate::world::{line_of_sight, OccupancyGrid, Partition, RegionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RegionState {
    #[default]
    Inactive,
    Active,
    Worthless,
}

/// Planar sector field of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FovModel<T: Scalar = f64> {
    pub radius: T,
    /// Full opening angle, radians.
    pub angle: T,
    /// Below this displacement the previous heading is kept.
    pub min_displacement: T,
    /// Gate visibility on ground-truth line of sight.
    pub occlusion: bool,
}

impl<T: Scalar> Default for FovModel<T> {
    fn default() -> Self {
        Self {
            radius: T::of(4.0),
            angle: T::of(87f64.to_radians()),
            min_displacement: T::of(0.05),
            occlusion: false,
        }
    }
}

impl<T: Scalar> FovModel<T> {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.radius > T::zero()) {
            return Err(crate::Error::InvalidParameter {
                name: "fov.radius",
                message: "must be > 0".into(),
            });
        }
        if !(self.angle > T::zero() && self.angle <= T::TAU()) {
            return Err(crate::Error::InvalidParameter {
                name: "fov.angle",
                message: "must lie in (0, 2π]".into(),
            });
        }
        Ok(())
    }
}

pub fn estimate_heading<T: Scalar>(prev: Point2<T>, curr: Point2<T>, prev_heading: T, min_displacement: T) -> T {
    if prev.dist(&curr) >= min_displacement && prev != curr {
        prev.bearing_to(&curr)
    } else {
        prev_heading
    }
}

/// Inside the sector: within `radius` and within half the opening angle of
/// `heading`. The eye itself is always visible.
pub fn visible<T: Scalar>(g: Point2<T>, eye: Point2<T>, heading: T, fov: &FovModel<T>) -> bool {
    let d2 = g.dist_sq(&eye);
    if d2 > fov.radius * fov.radius {
        return false;
    }
    if d2 == T::zero() {
        return true;
    }
    angle_diff(eye.bearing_to(&g), heading).abs() <= fov.angle / T::of(2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMemory {
    pub state: RegionState,
    pub n: usize,
    /// Row-major `n × n`.
    pub bitmap: Vec<bool>,
    pub seen_count: usize,
}

impl RegionMemory {
    pub fn new(n: usize) -> Self {
        Self {
            state: RegionState::Inactive,
            n,
            bitmap: vec![false; n * n],
            seen_count: 0,
        }
    }

    pub fn reset_bitmap(&mut self) {
        self.bitmap.iter_mut().for_each(|b| *b = false);
        self.seen_count = 0;
    }

    pub fn coverage_ratio(&self) -> f64 {
        self.seen_count as f64 / (self.n * self.n) as f64
    }

    /// Center of bitmap cell `(i, j)` (column, row) inside `bounds`.
    pub fn cell_center<T: Scalar>(&self, bounds: &Rect<T>, i: usize, j: usize) -> Point2<T> {
        let n = T::from_count(self.n);
        let half = T::of(0.5);
        Point2::new(
            bounds.min.x + (T::from_count(i) + half) * bounds.width() / n,
            bounds.min.y + (T::from_count(j) + half) * bounds.height() / n,
        )
    }

    /// Marks every bitmap cell the sector sees; returns the number of new cells.
    /// `grid` is consulted only when the FOV has occlusion enabled.
    pub fn accumulate<T: Scalar>(
        &mut self,
        bounds: &Rect<T>,
        eye: Point2<T>,
        heading: T,
        fov: &FovModel<T>,
        grid: Option<&OccupancyGrid>,
    ) -> usize {
        let mut fresh = 0;
        for j in 0..self.n {
            for i in 0..self.n {
                let k = j * self.n + i;
                if self.bitmap[k] {
                    continue;
                }
                let g = self.cell_center(bounds, i, j);
                if !visible(g, eye, heading, fov) {
                    continue;
                }
                if fov.occlusion {
                    if let Some(grid) = grid {
                        let a = Point2::new(eye.x.as_f64(), eye.y.as_f64());
                        let b = Point2::new(g.x.as_f64(), g.y.as_f64());
                        if !line_of_sight(grid, a, b) {
                            continue;
                        }
                    }
                }
                self.bitmap[k] = true;
                fresh += 1;
            }
        }
        self.seen_count += fresh;
        fresh
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageConfig {
    /// Bitmap side length `N`.
    pub n: usize,
    pub fov: FovModel,
    /// Exit coverage at or above which a region becomes worthless.
    pub tau: f64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            n: 16,
            fov: FovModel::default(),
            tau: 0.8,
        }
    }
}

impl CoverageConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.n == 0 {
            return Err(crate::Error::InvalidParameter {
                name: "coverage.n",
                message: "must be >= 1".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(crate::Error::InvalidParameter {
                name: "coverage.tau",
                message: "must lie in [0, 1]".into(),
            });
        }
        self.fov.validate()
    }
}

/// Result of one pose update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub leaving: RegionId,
    pub entering: RegionId,
    pub leaving_became_worthless: bool,
}

/// Memory for every region of a partition, driven by pose updates.
#[derive(Debug, Clone)]
pub struct CoverageMemory {
    cfg: CoverageConfig,
    regions: Vec<RegionMemory>,
    bounds: Vec<Rect>,
    current: Option<RegionId>,
}

impl CoverageMemory {
    pub fn new(partition: &Partition, cfg: CoverageConfig) -> Self {
        Self {
            regions: vec![RegionMemory::new(cfg.n); partition.len()],
            bounds: partition.regions().iter().map(|r| r.bounds).collect(),
            cfg,
            current: None,
        }
    }

    pub fn config(&self) -> &CoverageConfig {
        &self.cfg
    }

    pub fn current(&self) -> Option<RegionId> {
        self.current
    }

    pub fn region(&self, id: RegionId) -> &RegionMemory {
        &self.regions[id]
    }

    pub fn regions(&self) -> &[RegionMemory] {
        &self.regions
    }

    pub fn states(&self) -> Vec<RegionState> {
        self.regions.iter().map(|r| r.state).collect()
    }

    pub fn coverage_ratio(&self, id: RegionId) -> f64 {
        self.regions[id].coverage_ratio()
    }

    fn enter(&mut self, id: RegionId, eye: Point2, heading: f64, grid: Option<&OccupancyGrid>) {
        let m = &mut self.regions[id];
        if m.state != RegionState::Worthless {
            m.state = RegionState::Active;
        }
        m.reset_bitmap();
        m.accumulate(&self.bounds[id], eye, heading, &self.cfg.fov, grid);
    }

    /// Applies the exit rule to `leaving` and enters `entering`. A no-op when
    /// the two are equal.
    pub fn on_region_transition(
        &mut self,
        leaving: RegionId,
        entering: RegionId,
        eye: Point2,
        heading: f64,
        grid: Option<&OccupancyGrid>,
    ) -> Option<Transition> {
        if leaving == entering {
            return None;
        }
        let out = &mut self.regions[leaving];
        let worthless = out.state != RegionState::Worthless && out.coverage_ratio() >= self.cfg.tau;
        if worthless {
            out.state = RegionState::Worthless;
        }
        self.enter(entering, eye, heading, grid);
        self.current = Some(entering);
        Some(Transition {
            leaving,
            entering,
            leaving_became_worthless: worthless,
        })
    }

    /// Feeds the pose in `region`: handles a boundary crossing if the region
    /// changed, otherwise accumulates into the current region.
    pub fn update(
        &mut self,
        region: RegionId,
        eye: Point2,
        heading: f64,
        grid: Option<&OccupancyGrid>,
    ) -> Option<Transition> {
        match self.current {
            None => {
                self.enter(region, eye, heading, grid);
                self.current = Some(region);
                None
            }
            Some(cur) if cur != region => self.on_region_transition(cur, region, eye, heading, grid),
            Some(cur) => {
                self.regions[cur].accumulate(&self.bounds[cur], eye, heading, &self.cfg.fov, grid);
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn fov(radius: f64, angle: f64) -> FovModel {
        FovModel {
            radius,
            angle,
            min_displacement: 0.05,
            occlusion: false,
        }
    }

    #[test]
    fn heading_examples() {
        let o = Point2::new(0.0, 0.0);
        assert_eq!(estimate_heading(o, Point2::new(1.0, 0.0), 2.0, 0.05), 0.0);
        assert_eq!(estimate_heading(o, Point2::new(0.0, 1.0), 2.0, 0.05), FRAC_PI_2);
        assert_eq!(estimate_heading(o, o, 2.0, 0.05), 2.0);
        assert_eq!(estimate_heading(o, Point2::new(0.01, 0.0), 2.0, 0.05), 2.0);
    }

    #[test]
    fn visibility_boundaries() {
        let o = Point2::new(0.0, 0.0);
        let f = fov(4.0, FRAC_PI_2);
        assert!(visible(Point2::new(4.0, 0.0), o, 0.0, &f));
        assert!(!visible(Point2::new(4.0 + 1e-9, 0.0), o, 0.0, &f));
        let edge = PI / 4.0 + 1e-6;
        assert!(!visible(Point2::new(edge.cos(), edge.sin()), o, 0.0, &f));
        let inside = PI / 4.0 - 1e-6;
        assert!(visible(Point2::new(inside.cos(), inside.sin()), o, 0.0, &f));
        // Wrap-around: heading near π sees points just below −π.
        assert!(visible(Point2::new(-1.0, -0.01), o, PI, &f));
    }

    #[test]
    fn full_sector_sees_everything() {
        let b = Rect::new(Point2::new(0.0, 0.0), Point2::new(4.0, 4.0));
        let mut m = RegionMemory::new(16);
        let n = m.accumulate(&b, b.center(), 0.0, &fov(3.0, TAU), None);
        assert_eq!(n, 256);
        assert_eq!(m.coverage_ratio(), 1.0);
        assert_eq!(m.accumulate(&b, b.center(), 0.0, &fov(3.0, TAU), None), 0);
    }

    #[test]
    fn ratio_arithmetic() {
        let mut m = RegionMemory::new(10);
        assert_eq!(m.coverage_ratio(), 0.0);
        for b in m.bitmap.iter_mut().take(25) {
            *b = true;
        }
        m.seen_count = 25;
        assert_eq!(m.coverage_ratio(), 0.25);
    }

    #[test]
    fn narrow_sector_matches_per_cell_check() {
        let b = Rect::new(Point2::new(2.0, 1.0), Point2::new(6.0, 5.0));
        let f = fov(2.5, FRAC_PI_2);
        let eye = Point2::new(3.0, 2.0);
        let mut m = RegionMemory::new(8);
        let got = m.accumulate(&b, eye, 0.6, &f, None);
        let mut expect = 0;
        for j in 0..8 {
            for i in 0..8 {
                let c = Point2::new(2.0 + (i as f64 + 0.5) * 0.5, 1.0 + (j as f64 + 0.5) * 0.5);
                let (dx, dy) = (c.x - eye.x, c.y - eye.y);
                let r = dx.hypot(dy);
                let mut d = dy.atan2(dx) - 0.6;
                while d > PI {
                    d -= TAU;
                }
                while d <= -PI {
                    d += TAU;
                }
                let v = r <= 2.5 && d.abs() <= FRAC_PI_2 / 2.0;
                assert_eq!(m.bitmap[j * 8 + i], v);
                expect += v as usize;
            }
        }
        assert_eq!(got, expect);
    }

    fn two_regions() -> Partition {
        crate::world::partition(Rect::new(Point2::new(0.0, 0.0), Point2::new(8.0, 4.0)), 4.0).unwrap()
    }

    #[test]
    fn leaving_with_high_coverage_is_worthless() {
        let p = two_regions();
        let cfg = CoverageConfig {
            n: 4,
            fov: fov(10.0, TAU),
            tau: 0.8,
        };
        let mut mem = CoverageMemory::new(&p, cfg);
        mem.update(0, Point2::new(2.0, 2.0), 0.0, None);
        assert_eq!(mem.region(0).state, RegionState::Active);
        assert_eq!(mem.coverage_ratio(0), 1.0);
        let t = mem.update(1, Point2::new(5.0, 2.0), 0.0, None).unwrap();
        assert!(t.leaving_became_worthless);
        assert_eq!(mem.region(0).state, RegionState::Worthless);
        // Re-entering does not revive it.
        mem.update(0, Point2::new(3.0, 2.0), 0.0, None);
        assert_eq!(mem.region(0).state, RegionState::Worthless);
    }

    #[test]
    fn leaving_with_low_coverage_keeps_state_and_reentry_resets() {
        let p = two_regions();
        let cfg = CoverageConfig {
            n: 4,
            fov: fov(1.0, 0.5),
            tau: 0.8,
        };
        let mut mem = CoverageMemory::new(&p, cfg);
        mem.update(0, Point2::new(3.9, 2.0), 0.0, None);
        let cov = mem.coverage_ratio(0);
        assert!(cov < 0.8);
        let t = mem.update(1, Point2::new(4.1, 2.0), 0.0, None).unwrap();
        assert!(!t.leaving_became_worthless);
        assert_eq!(mem.region(0).state, RegionState::Active);
        let before = mem.region(1).clone();
        // Facing away from region 0 on re-entry: its old bitmap must be gone.
        mem.update(0, Point2::new(3.95, 0.1), 0.0, None);
        assert_eq!(mem.coverage_ratio(0), 0.0);
        assert_eq!(mem.region(1).bitmap, before.bitmap);
    }

    #[test]
    fn same_region_transition_is_noop() {
        let p = two_regions();
        let mut mem = CoverageMemory::new(&p, CoverageConfig::default());
        assert!(mem
            .on_region_transition(1, 1, Point2::new(5.0, 1.0), 0.0, None)
            .is_none());
        assert_eq!(mem.states(), vec![RegionState::Inactive; 2]);
    }
}
