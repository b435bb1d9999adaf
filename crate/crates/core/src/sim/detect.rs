//! Emulated object detector: ground-truth objects filtered by the camera sector
//! and line of sight, with optional confidence noise, jitter and misses.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scenario::SceneObject;
use crate::coverage::{visible, FovModel};
use crate::geometry::{Point2, Point3};
use crate::semantic_buffer::Detection;
use crate::world::{line_of_sight, OccupancyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Probability that a visible object is missed.
    pub false_negative_rate: f64,
    /// Planar jitter radius, meters.
    pub position_sigma: f64,
    /// Confidences are uniform in `[min_confidence, 1]`.
    pub min_confidence: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            false_negative_rate: 0.0,
            position_sigma: 0.0,
            min_confidence: 1.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |name, message: &str| {
            Err(crate::Error::InvalidParameter {
                name,
                message: message.into(),
            })
        };
        if !(0.0..=1.0).contains(&self.false_negative_rate) {
            return bad("detector.false_negative_rate", "must lie in [0, 1]");
        }
        if !(self.position_sigma >= 0.0) {
            return bad("detector.position_sigma", "must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return bad("detector.min_confidence", "must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Index of every object in the camera sector with a clear line of sight.
pub fn visible_objects(
    eye: Point2,
    heading: f64,
    objects: &[SceneObject],
    grid: &OccupancyGrid,
    fov: &FovModel,
) -> Vec<usize> {
    objects
        .iter()
        .enumerate()
        .filter(|(_, o)| visible(o.planar(), eye, heading, fov) && line_of_sight(grid, eye, o.planar()))
        .map(|(i, _)| i)
        .collect()
}

/// Detections for one frame. Random draws happen only for enabled noise terms,
/// in object order, so a noiseless detector never touches `rng`.
pub fn detect<R: Rng>(
    eye: Point2,
    heading: f64,
    objects: &[SceneObject],
    grid: &OccupancyGrid,
    fov: &FovModel,
    cfg: &DetectorConfig,
    timestamp: f64,
    rng: &mut R,
) -> Vec<Detection> {
    let mut out = Vec::new();
    for i in visible_objects(eye, heading, objects, grid, fov) {
        let o = &objects[i];
        if cfg.false_negative_rate > 0.0 && rng.random_bool(cfg.false_negative_rate) {
            continue;
        }
        let confidence = if cfg.min_confidence < 1.0 {
            rng.random_range(cfg.min_confidence..=1.0)
        } else {
            1.0
        };
        let (mut x, mut y) = (o.x, o.y);
        if cfg.position_sigma > 0.0 {
            // Uniform in the disc of radius sigma.
            let r = cfg.position_sigma * rng.random::<f64>().sqrt();
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            x += r * a.cos();
            y += r * a.sin();
        }
        out.push(Detection {
            label: o.label.clone(),
            confidence,
            position: Point3::new(x, y, o.z),
            timestamp,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn room() -> OccupancyGrid {
        OccupancyGrid::parse_raster("8 3 1\n........\n...#....\n........\n").unwrap()
    }

    #[test]
    fn wall_occludes() {
        let g = room();
        let objs = [SceneObject::new("chair", 5.5, 1.5)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let fov = FovModel::default();
        let d = detect(Point2::new(1.5, 1.5), 0.0, &objs, &g, &fov, &DetectorConfig::default(), 0.0, &mut rng);
        assert!(d.is_empty());
        let d = detect(Point2::new(1.5, 2.5), 0.0, &objs, &g, &fov, &DetectorConfig::default(), 0.0, &mut rng);
        assert!(d.is_empty());
        let d = detect(Point2::new(4.5, 2.5), -std::f64::consts::FRAC_PI_4, &objs, &g, &fov, &DetectorConfig::default(), 0.0, &mut rng);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn noiseless_detection_is_exact() {
        let g = room();
        let objs = [SceneObject::new("chair", 4.5, 2.5)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = detect(
            Point2::new(1.5, 2.5),
            0.0,
            &objs,
            &g,
            &FovModel::default(),
            &DetectorConfig::default(),
            3.0,
            &mut rng,
        );
        assert_eq!(d[0].confidence, 1.0);
        assert_eq!(d[0].position.planar(), objs[0].planar());
        assert_eq!(d[0].timestamp, 3.0);
    }

    #[test]
    fn certain_misses_detect_nothing() {
        let g = room();
        let objs = [SceneObject::new("chair", 4.5, 2.5)];
        let cfg = DetectorConfig {
            false_negative_rate: 1.0,
            ..DetectorConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            assert!(detect(Point2::new(1.5, 2.5), 0.0, &objs, &g, &FovModel::default(), &cfg, 0.0, &mut rng).is_empty());
        }
    }

    #[test]
    fn jitter_is_bounded() {
        let g = room();
        let objs = [SceneObject::new("chair", 4.5, 2.5)];
        let cfg = DetectorConfig {
            position_sigma: 0.2,
            min_confidence: 0.5,
            ..DetectorConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let d = detect(Point2::new(1.5, 2.5), 0.0, &objs, &g, &FovModel::default(), &cfg, 0.0, &mut rng);
            assert!(d[0].position.planar().dist(&objs[0].planar()) <= 0.2 + 1e-12);
            assert!((0.5..=1.0).contains(&d[0].confidence));
        }
    }
}
