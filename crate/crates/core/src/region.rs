//! Region-level evaluation: Gaussian-decay semantic relevance per viewpoint,
//! aggregate sub-region scores, the two-phase semantic search, activation and
//! greedy exploration ordering.

use serde::{Deserialize, Serialize};

use crate::coverage::RegionState;
use crate::geometry::{Point2, Rect};
use crate::scalar::Scalar;
use crate::semantic_buffer::SemanticPoint;
use crate::viewpoint::Viewpoint;
use crate::world::RegionId;

/// How the semantic term of a region score is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticSum {
    /// Sum of `S̄(v)` over every viewpoint in the region.
    #[default]
    AllViewpoints,
    /// A single `S̄` term: that of the highest-scoring viewpoint.
    BestViewpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluatorConfig<T: Scalar = f64> {
    /// Viewpoint neighbourhood radius; the Gaussian has `σ = r_xy / √2`.
    pub r_xy: T,
    pub activation_threshold: T,
    pub phase1_relevance_threshold: T,
    /// Ignore points farther than 3σ when computing `S̄`.
    pub truncate_3sigma: bool,
    pub semantic_sum: SemanticSum,
}

impl<T: Scalar> Default for EvaluatorConfig<T> {
    fn default() -> Self {
        Self {
            r_xy: T::of(2.0),
            activation_threshold: T::one(),
            phase1_relevance_threshold: T::of(0.9),
            truncate_3sigma: true,
            semantic_sum: SemanticSum::AllViewpoints,
        }
    }
}

impl<T: Scalar> EvaluatorConfig<T> {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.r_xy > T::zero()) {
            return Err(crate::Error::InvalidParameter {
                name: "r_xy",
                message: "must be > 0".into(),
            });
        }
        let t = self.phase1_relevance_threshold;
        if !(t > T::zero() && t <= T::one()) {
            return Err(crate::Error::InvalidParameter {
                name: "phase1_relevance_threshold",
                message: "must lie in (0, 1]".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionScore<T: Scalar = f64> {
    pub region_id: RegionId,
    pub viewpoint_sum: T,
    pub semantic_sum: T,
    pub total: T,
    pub activated: bool,
}

/// `ω = exp(−‖p−v‖² / σ²)` with `σ = (√2/2)·r_xy`, i.e. `σ² = r_xy² / 2`.
pub fn gaussian_weight<T: Scalar>(p: Point2<T>, v: Point2<T>, r_xy: T) -> T {
    let sigma_sq = r_xy * r_xy / T::of(2.0);
    (-(p.dist_sq(&v)) / sigma_sq).exp()
}

/// Weighted mean `Σ ωᵢ·I(pᵢ) / Σ ωᵢ` over the neighbourhood of `v`; 0 when the
/// neighbourhood is empty or every weight underflows. With truncation, points
/// beyond 3σ are skipped unless that could shift the mean by more than 1e-5.
pub fn viewpoint_semantic_score<T: Scalar>(
    v: Point2<T>,
    points: &[SemanticPoint<T>],
    r_xy: T,
    truncate_3sigma: bool,
) -> T {
    // (3σ)² = 9·r_xy²/2
    let cutoff_sq = T::of(4.5) * r_xy * r_xy;
    let mut num = T::zero();
    let mut den = T::zero();
    let mut dropped = 0usize;
    for p in points {
        let q = p.position.planar();
        if truncate_3sigma && q.dist_sq(&v) > cutoff_sq {
            dropped += 1;
            continue;
        }
        let w = gaussian_weight(q, v, r_xy);
        num = num + w * p.relevance;
        den = den + w;
    }
    // Each dropped weight is below e⁻⁹, so the mean moves by at most
    // dropped·e⁻⁹ / den. Past 1e-5 the exact sum is taken instead.
    if dropped > 0 && T::from_count(dropped) * T::of((-9f64).exp()) > T::of(1e-5) * den {
        return viewpoint_semantic_score(v, points, r_xy, false);
    }
    if den > T::zero() {
        num / den
    } else {
        T::zero()
    }
}

/// Fills `s_bar` on each viewpoint.
pub fn score_semantics<T: Scalar>(viewpoints: &mut [Viewpoint<T>], points: &[SemanticPoint<T>], cfg: &EvaluatorConfig<T>) {
    for v in viewpoints {
        v.s_bar = viewpoint_semantic_score(v.position, points, cfg.r_xy, cfg.truncate_3sigma);
    }
}

/// Aggregate score of one sub-region from its already scored viewpoints.
pub fn region_score<T: Scalar>(
    region_id: RegionId,
    viewpoints: &[Viewpoint<T>],
    cfg: &EvaluatorConfig<T>,
) -> RegionScore<T> {
    let viewpoint_sum = viewpoints
        .iter()
        .fold(T::zero(), |acc, v| acc + v.s_viewpoint);
    let semantic_sum = match cfg.semantic_sum {
        SemanticSum::AllViewpoints => viewpoints.iter().fold(T::zero(), |acc, v| acc + v.s_bar),
        SemanticSum::BestViewpoint => viewpoints
            .iter()
            .min_by(|a, b| {
                b.s_viewpoint
                    .partial_cmp(&a.s_viewpoint)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.id.cmp(&b.id))
            })
            .map_or(T::zero(), |v| v.s_bar),
    };
    let total = viewpoint_sum + semantic_sum;
    RegionScore {
        region_id,
        viewpoint_sum,
        semantic_sum,
        total,
        activated: !viewpoints.is_empty() && total >= cfg.activation_threshold,
    }
}

/// Outcome of the two-phase semantic search for one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SearchOutcome<T: Scalar = f64> {
    /// A point inside the region's circumscribed circle reached the threshold.
    ShortCircuit { point: SemanticPoint<T>, relevance: T },
    /// Fall through to neighbourhood scoring.
    Scored,
}

/// Phase one: scan points inside the circle circumscribing `bounds`; the most
/// relevant one (first in input order among equals) short-circuits if it meets
/// the threshold.
pub fn two_phase_search<T: Scalar>(
    bounds: &Rect<T>,
    points: &[SemanticPoint<T>],
    cfg: &EvaluatorConfig<T>,
) -> SearchOutcome<T> {
    let c = bounds.center();
    let r = bounds.circumradius();
    let r_sq = r * r;
    let mut best: Option<&SemanticPoint<T>> = None;
    for p in points {
        if p.position.planar().dist_sq(&c) > r_sq {
            continue;
        }
        if best.is_none_or(|b| p.relevance > b.relevance) {
            best = Some(p);
        }
    }
    match best {
        Some(p) if p.relevance >= cfg.phase1_relevance_threshold => SearchOutcome::ShortCircuit {
            point: p.clone(),
            relevance: p.relevance,
        },
        _ => SearchOutcome::Scored,
    }
}

/// Activated, non-worthless regions by total descending, then path cost from
/// the robot ascending, then id. `path_cost` and `states` are indexed by region id.
pub fn order_regions<T: Scalar>(
    scores: &[RegionScore<T>],
    path_cost: &[T],
    states: &[RegionState],
) -> Vec<RegionId> {
    let mut keep: Vec<&RegionScore<T>> = scores
        .iter()
        .filter(|s| s.activated && states.get(s.region_id) != Some(&RegionState::Worthless))
        .collect();
    keep.sort_by(|a, b| {
        b.total
            .partial_cmp(&a.total)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                path_cost[a.region_id]
                    .partial_cmp(&path_cost[b.region_id])
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .then(a.region_id.cmp(&b.region_id))
    });
    keep.into_iter().map(|s| s.region_id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;

    fn pt(x: f64, y: f64, rel: f64) -> SemanticPoint {
        SemanticPoint {
            position: Point3::new(x, y, 0.0),
            label: "x".into(),
            relevance: rel,
            score: rel,
            confidence: 1.0,
        }
    }

    #[test]
    fn gaussian_anchor_values() {
        let v = Point2::new(1.0, 2.0);
        assert_eq!(gaussian_weight(v, v, 1.5), 1.0);
        let at_r = gaussian_weight(Point2::new(1.0 + 1.5, 2.0), v, 1.5);
        assert!((at_r - (-2.0f64).exp()).abs() < 1e-12);
        let d = 1.5 / 2f64.sqrt();
        let at_sigma = gaussian_weight(Point2::new(1.0, 2.0 + d), v, 1.5);
        assert!((at_sigma - (-1.0f64).exp()).abs() < 1e-12);
        assert!((at_r - 0.135335).abs() < 1e-6);
        assert!((at_sigma - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn gaussian_in_f32() {
        let w = gaussian_weight(Point2::<f32>::new(1.0, 0.0), Point2::new(0.0, 0.0), 1.0);
        assert!((w - (-2.0f32).exp()).abs() < 1e-6);
    }

    #[test]
    fn weighted_mean_examples() {
        let v = Point2::new(0.0, 0.0);
        assert!((viewpoint_semantic_score(v, &[pt(0.0, 0.0, 0.8)], 2.0, true) - 0.8).abs() < 1e-15);
        let two = [pt(1.0, 0.0, 0.2), pt(-1.0, 0.0, 0.6)];
        assert!((viewpoint_semantic_score(v, &two, 2.0, false) - 0.4).abs() < 1e-12);
        assert_eq!(viewpoint_semantic_score(v, &[], 2.0, false), 0.0);
    }

    #[test]
    fn truncation_drops_far_points() {
        let v = Point2::new(0.0, 0.0);
        let cutoff = 3.0 * 2.0 / 2f64.sqrt();
        let mut pts = vec![pt(cutoff + 0.01, 0.0, 1.0)];
        pts.extend((0..20).map(|_| pt(0.5, 0.0, 0.2)));
        assert!((viewpoint_semantic_score(v, &pts, 2.0, true) - 0.2).abs() < 1e-15);
        assert!(viewpoint_semantic_score(v, &pts, 2.0, false) > 0.2);
        // A lone far point would shift the mean too much to drop.
        assert_eq!(viewpoint_semantic_score(v, &pts[..1], 2.0, true), 1.0);
        let sparse = [pt(0.5, 0.0, 0.2), pt(cutoff + 0.01, 0.0, 1.0)];
        let (t, e) = (viewpoint_semantic_score(v, &sparse, 2.0, true), viewpoint_semantic_score(v, &sparse, 2.0, false));
        assert_eq!(t, e);
    }

    fn vp(id: usize, s: f64, bar: f64) -> Viewpoint {
        Viewpoint {
            s_viewpoint: s,
            s_bar: bar,
            ..Viewpoint::at(id, 0, Point2::new(0.0, 0.0))
        }
    }

    #[test]
    fn region_score_examples() {
        let cfg = EvaluatorConfig::default();
        let empty = region_score::<f64>(3, &[], &cfg);
        assert_eq!(empty.total, 0.0);
        assert!(!empty.activated);
        let one = region_score(3, &[vp(0, 5.0, 0.5)], &cfg);
        assert_eq!(one.total, 5.5);
        assert!(one.activated);
        assert_eq!(one.total, one.viewpoint_sum + one.semantic_sum);
    }

    #[test]
    fn best_viewpoint_summation_uses_one_term() {
        let cfg = EvaluatorConfig {
            semantic_sum: SemanticSum::BestViewpoint,
            ..EvaluatorConfig::default()
        };
        let s = region_score(0, &[vp(0, 1.0, 0.9), vp(1, 4.0, 0.3), vp(2, 4.0, 0.7)], &cfg);
        assert_eq!(s.semantic_sum, 0.3);
        assert_eq!(s.viewpoint_sum, 9.0);
    }

    #[test]
    fn two_phase_examples() {
        let cfg = EvaluatorConfig::default();
        let b = Rect::new(Point2::new(0.0, 0.0), Point2::new(4.0, 4.0));
        let out = two_phase_search(&b, &[pt(1.0, 1.0, 0.3), pt(3.0, 3.0, 1.0)], &cfg);
        assert!(matches!(out, SearchOutcome::ShortCircuit { relevance, .. } if relevance == 1.0));
        assert_eq!(two_phase_search(&b, &[pt(1.0, 1.0, 0.3)], &cfg), SearchOutcome::Scored);
        // Circumradius is √8 ≈ 2.828 around (2, 2).
        let outside = pt(2.0 + 2.83, 2.0, 1.0);
        assert_eq!(two_phase_search(&b, &[outside], &cfg), SearchOutcome::Scored);
        let inside = pt(2.0 + 2.82, 2.0, 1.0);
        assert!(matches!(two_phase_search(&b, &[inside], &cfg), SearchOutcome::ShortCircuit { .. }));
    }

    fn rs(id: usize, total: f64) -> RegionScore {
        RegionScore {
            region_id: id,
            viewpoint_sum: total,
            semantic_sum: 0.0,
            total,
            activated: true,
        }
    }

    #[test]
    fn ordering_examples() {
        let states = vec![RegionState::Inactive; 3];
        let order = order_regions(&[rs(0, 3.0), rs(1, 7.0), rs(2, 5.0)], &[1.0, 1.0, 1.0], &states);
        assert_eq!(order, vec![1, 2, 0]);

        let order = order_regions(&[rs(0, 5.0), rs(1, 5.0)], &[4.0, 2.0, 0.0], &states);
        assert_eq!(order, vec![1, 0]);

        let mut states = states;
        states[1] = RegionState::Worthless;
        let order = order_regions(&[rs(0, 3.0), rs(1, 70.0), rs(2, 5.0)], &[1.0, 1.0, 1.0], &states);
        assert_eq!(order, vec![2, 0]);

        let mut off = rs(0, 9.0);
        off.activated = false;
        assert!(order_regions(&[off], &[0.0], &[RegionState::Active]).is_empty());
    }
}
