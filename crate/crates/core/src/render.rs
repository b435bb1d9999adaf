//! Static PPM rendering of one trace frame.
//!
//! Layers, bottom to top: occupancy known at the frame (unknown mid gray, free
//! light, occupied dark), region tints by memory state (Active blue, Worthless
//! red), region borders, the latest plan's route and viewpoints (colored by
//! `s_viewpoint`, dim to bright), semantic points (disc size grows with
//! relevance), the success circle around the target, the path driven so far
//! and the robot.

use crate::coverage::RegionState;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::sim::trace::Trace;
use crate::world::OccupancyGrid;

pub type Rgb = [u8; 3];

const UNKNOWN: Rgb = [128, 128, 128];
const FREE: Rgb = [236, 236, 236];
const OCCUPIED: Rgb = [32, 32, 32];
const BORDER: Rgb = [170, 170, 190];
const ACTIVE: Rgb = [60, 110, 230];
const WORTHLESS: Rgb = [220, 60, 50];
const ROUTE: Rgb = [0, 180, 200];
const PATH: Rgb = [20, 160, 40];
const POINT: Rgb = [230, 140, 0];
const TARGET: Rgb = [200, 0, 200];
const ROBOT: Rgb = [230, 0, 0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Pixels per grid cell.
    pub scale: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { scale: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, fill: Rgb) -> Self {
        Self {
            width,
            height,
            rgb: fill.repeat(width * height),
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        let i = 3 * (y * self.width + x);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn set(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            let i = 3 * (y as usize * self.width + x as usize);
            self.rgb[i..i + 3].copy_from_slice(&c);
        }
    }

    fn blend(&mut self, x: usize, y: usize, c: Rgb, a: f64) {
        let old = self.get(x, y);
        let mixed = std::array::from_fn(|k| (old[k] as f64 * (1.0 - a) + c[k] as f64 * a).round() as u8);
        self.set(x as i64, y as i64, mixed);
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), c: Rgb) {
        let n = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().max(1.0) as usize;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let x = a.0 + (b.0 - a.0) * t;
            let y = a.1 + (b.1 - a.1) * t;
            self.set(x.floor() as i64, y.floor() as i64, c);
        }
    }

    fn disc(&mut self, center: (f64, f64), r: f64, c: Rgb) {
        let r2 = r * r;
        for y in (center.1 - r).floor() as i64..=(center.1 + r).ceil() as i64 {
            for x in (center.0 - r).floor() as i64..=(center.0 + r).ceil() as i64 {
                let (dx, dy) = (x as f64 + 0.5 - center.0, y as f64 + 0.5 - center.1);
                if dx * dx + dy * dy <= r2 {
                    self.set(x, y, c);
                }
            }
        }
    }

    fn ring(&mut self, center: (f64, f64), r: f64, c: Rgb) {
        let n = (r * 8.0).ceil().max(16.0) as usize;
        for i in 0..n {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            self.set(
                (center.0 + r * a.cos()).floor() as i64,
                (center.1 + r * a.sin()).floor() as i64,
                c,
            );
        }
    }

    /// Binary PPM (`P6`).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

/// World to pixel mapping for a grid rendered at `scale` pixels per cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canvas {
    pub origin: Point2,
    pub cell_size: f64,
    pub scale: usize,
    pub width: usize,
    pub height: usize,
}

impl Canvas {
    pub fn new(grid: &OccupancyGrid, scale: usize) -> Self {
        Self {
            origin: grid.origin(),
            cell_size: grid.cell_size(),
            scale,
            width: grid.width() * scale,
            height: grid.height() * scale,
        }
    }

    /// Continuous pixel coordinates; rows grow downward.
    pub fn to_pixel(&self, p: Point2) -> (f64, f64) {
        let k = self.scale as f64 / self.cell_size;
        ((p.x - self.origin.x) * k, self.height as f64 - (p.y - self.origin.y) * k)
    }

    pub fn to_world(&self, px: (f64, f64)) -> Point2 {
        let k = self.cell_size / self.scale as f64;
        Point2::new(self.origin.x + px.0 * k, self.origin.y + (self.height as f64 - px.1) * k)
    }

    fn meters(&self, m: f64) -> f64 {
        m * self.scale as f64 / self.cell_size
    }
}

fn ramp(t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0);
    [(40.0 + 215.0 * t) as u8, (40.0 + 180.0 * t) as u8, (120.0 * (1.0 - t)) as u8]
}

/// Renders the state recorded at step `frame`.
pub fn render_frame(trace: &Trace, frame: usize, opts: &RenderOptions) -> Result<Image> {
    if trace.steps.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let last = trace.steps.len() - 1;
    if frame > last {
        return Err(Error::FrameOutOfRange { frame, last });
    }
    if opts.scale == 0 {
        return Err(Error::InvalidParameter {
            name: "scale",
            message: "must be >= 1".into(),
        });
    }
    let mut grid = OccupancyGrid::parse_raster(&trace.header.map)?;
    for s in &trace.steps[..=frame] {
        for &c in &s.revealed {
            if c < grid.len() {
                grid.observe(c);
            }
        }
    }
    let cv = Canvas::new(&grid, opts.scale);
    let mut img = Image::new(cv.width, cv.height, UNKNOWN);
    let sc = opts.scale;
    for id in 0..grid.len() {
        let color = match grid.state(id) {
            crate::world::CellState::Unknown => continue,
            crate::world::CellState::Free => FREE,
            crate::world::CellState::Occupied => OCCUPIED,
        };
        let (ix, iy) = grid.coords(id);
        let py0 = (grid.height() - 1 - iy) * sc;
        for dy in 0..sc {
            for dx in 0..sc {
                img.set((ix * sc + dx) as i64, (py0 + dy) as i64, color);
            }
        }
    }

    let step = &trace.steps[frame];
    for (r, rect) in trace.header.regions.iter().enumerate() {
        let (x0, y1) = cv.to_pixel(rect.min);
        let (x1, y0) = cv.to_pixel(rect.max);
        let (x0, y0) = (x0.round().max(0.0) as usize, y0.round().max(0.0) as usize);
        let (x1, y1) = (x1.round().min(cv.width as f64) as usize, y1.round().min(cv.height as f64) as usize);
        let tint = match step.memory.states.get(r) {
            Some(RegionState::Active) => Some(ACTIVE),
            Some(RegionState::Worthless) => Some(WORTHLESS),
            _ => None,
        };
        if let Some(t) = tint {
            for y in y0..y1 {
                for x in x0..x1 {
                    img.blend(x, y, t, 0.25);
                }
            }
        }
        for x in x0..x1 {
            img.set(x as i64, y0 as i64, BORDER);
        }
        for y in y0..y1 {
            img.set(x0 as i64, y as i64, BORDER);
        }
    }

    if let Some(plan) = trace.plan_at(frame) {
        for w in plan.route.windows(2) {
            img.line(cv.to_pixel(w[0]), cv.to_pixel(w[1]), ROUTE);
        }
        let max = plan.viewpoints.iter().map(|v| v.s_viewpoint).fold(0.0, f64::max);
        for v in &plan.viewpoints {
            let t = if max > 0.0 { v.s_viewpoint / max } else { 0.0 };
            let (x, y) = cv.to_pixel(v.position);
            let h = (sc as i64 / 2).max(1);
            for dy in -h..=h {
                for dx in -h..=h {
                    img.set(x as i64 + dx, y as i64 + dy, ramp(t));
                }
            }
        }
        for p in &plan.points {
            let r = 1.0 + p.relevance.clamp(0.0, 1.0) * sc as f64;
            img.disc(cv.to_pixel(p.position.planar()), r, POINT);
        }
    }

    if let Some(t) = trace.header.target.as_ref() {
        for o in trace.header.objects.iter().filter(|o| &o.label == t) {
            let c = cv.to_pixel(o.planar());
            img.ring(c, cv.meters(trace.header.success_distance), TARGET);
            img.disc(c, 1.5, TARGET);
        }
    }
    let path: Vec<Point2> = trace.steps[..=frame].iter().map(|s| s.pose.position()).collect();
    for w in path.windows(2) {
        img.line(cv.to_pixel(w[0]), cv.to_pixel(w[1]), PATH);
    }
    img.disc(cv.to_pixel(step.pose.position()), (sc as f64 * 0.75).max(1.5), ROBOT);
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_mapping_round_trips() {
        let g = OccupancyGrid::parse_raster("4 2 0.5\n....\n....\n").unwrap();
        let cv = Canvas::new(&g, 3);
        assert_eq!((cv.width, cv.height), (12, 6));
        assert_eq!(cv.to_pixel(Point2::new(0.0, 0.0)), (0.0, 6.0));
        assert_eq!(cv.to_pixel(Point2::new(2.0, 1.0)), (12.0, 0.0));
        let p = Point2::new(1.25, 0.4);
        let q = cv.to_world(cv.to_pixel(p));
        assert!(p.dist(&q) < 1e-12);
    }

    #[test]
    fn ppm_header() {
        let img = Image::new(2, 1, [1, 2, 3]);
        assert_eq!(img.to_ppm(), b"P6\n2 1\n255\n\x01\x02\x03\x01\x02\x03".to_vec());
    }
}
