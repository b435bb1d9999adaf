//! Rigid relevance tiers that constrain every score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    SameSceneStrong,
    SceneRelated,
    WeaklyRelated,
    Unrelated,
}

impl Band {
    /// Strongest first.
    pub const ALL: [Band; 4] = [
        Band::SameSceneStrong,
        Band::SceneRelated,
        Band::WeaklyRelated,
        Band::Unrelated,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

/// Which point of a band's range the mock backend reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandPoint {
    #[default]
    Midpoint,
    LowerBound,
}

/// Score ranges per band. Each range is `[lo, hi)` except the strongest band,
/// which is closed at `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandTable {
    pub same_scene_strong: [f64; 2],
    pub scene_related: [f64; 2],
    pub weakly_related: [f64; 2],
    pub unrelated: [f64; 2],
}

impl Default for BandTable {
    fn default() -> Self {
        Self {
            same_scene_strong: [0.75, 1.0],
            scene_related: [0.5, 0.75],
            weakly_related: [0.2, 0.5],
            unrelated: [0.0, 0.2],
        }
    }
}

impl BandTable {
    pub fn range(&self, band: Band) -> [f64; 2] {
        match band {
            Band::SameSceneStrong => self.same_scene_strong,
            Band::SceneRelated => self.scene_related,
            Band::WeaklyRelated => self.weakly_related,
            Band::Unrelated => self.unrelated,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |message: String| Error::InvalidParameter {
            name: "bands",
            message,
        };
        for b in Band::ALL {
            let [lo, hi] = self.range(b);
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
                return Err(err(format!("{b:?} range [{lo}, {hi}] is not a sub-interval of [0, 1]")));
            }
        }
        if self.unrelated[0] != 0.0 {
            return Err(err("unrelated band must start at 0".into()));
        }
        for pair in Band::ALL.windows(2) {
            let (strong, weak) = (self.range(pair[0]), self.range(pair[1]));
            if strong[0] < weak[1] {
                return Err(err(format!("{:?} overlaps {:?}", pair[0], pair[1])));
            }
        }
        Ok(())
    }

    pub fn contains(&self, band: Band, score: f64) -> bool {
        let [lo, hi] = self.range(band);
        if band == Band::SameSceneStrong {
            (lo..=hi).contains(&score)
        } else {
            (lo..hi).contains(&score)
        }
    }

    pub fn band_of(&self, score: f64) -> Option<Band> {
        Band::ALL.into_iter().find(|&b| self.contains(b, score))
    }

    pub fn value(&self, band: Band, point: BandPoint) -> f64 {
        let [lo, hi] = self.range(band);
        match point {
            BandPoint::Midpoint => (lo + hi) / 2.0,
            BandPoint::LowerBound => lo,
        }
    }

    /// Stronger bands compare greater.
    pub fn is_stronger(a: Band, b: Band) -> bool {
        a.index() < b.index()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_descending() {
        let t = BandTable::default();
        t.validate().unwrap();
        let mids: Vec<f64> = Band::ALL.iter().map(|&b| t.value(b, BandPoint::Midpoint)).collect();
        assert!(mids.windows(2).all(|w| w[0] > w[1]));
        for b in Band::ALL {
            assert!(t.contains(b, t.value(b, BandPoint::Midpoint)));
            assert!(t.contains(b, t.value(b, BandPoint::LowerBound)));
            assert_eq!(t.band_of(t.value(b, BandPoint::Midpoint)), Some(b));
        }
        assert_eq!(t.value(Band::Unrelated, BandPoint::LowerBound), 0.0);
        assert_eq!(t.band_of(1.0), Some(Band::SameSceneStrong));
        assert_eq!(t.band_of(0.75), Some(Band::SameSceneStrong));
    }

    #[test]
    fn overlapping_ranges_are_rejected() {
        let t = BandTable {
            scene_related: [0.5, 0.8],
            ..BandTable::default()
        };
        assert!(t.validate().is_err());
        let t = BandTable {
            unrelated: [0.05, 0.2],
            ..BandTable::default()
        };
        assert!(t.validate().is_err());
    }
}
