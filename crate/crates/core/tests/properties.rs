//! Property tests over the core invariants.

use std::collections::BTreeMap;

use proptest::prelude::*;
use semnav::config::RunConfig;
use semnav::coverage::RegionState;
use semnav::geometry::{Point2, Point3};
use semnav::region::{gaussian_weight, order_regions, viewpoint_semantic_score, RegionScore};
use semnav::relevance::{LabelSanitizer, LruTtlCache};
use semnav::semantic_buffer::{fused_relevance, BufferConfig, Detection, SemanticBuffer, SemanticPoint};
use semnav::sim::metrics::{compute_metrics, EpisodeResult, Termination};

const LABELS: [&str; 4] = ["bed", "lamp", "pillow", "sink"];

fn detections() -> impl Strategy<Value = Vec<Detection>> {
    prop::collection::vec((0usize..4, 0.0..1.0f64, 0.0..2.0f64, 0.0..2.0f64, 0u32..600), 1..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (l, c, x, y, t))| Detection {
                label: LABELS[l].into(),
                confidence: c,
                position: Point3::new(x, y, 0.0),
                // The index keeps (confidence, timestamp) pairs distinct.
                timestamp: t as f64 * 0.1 + i as f64 * 1e-4,
            })
            .collect()
    })
}

fn buffer_after(ds: &[Detection]) -> Vec<SemanticPoint> {
    let cfg = BufferConfig {
        hash_cell: 0.25,
        ..BufferConfig::default()
    };
    let mut b = SemanticBuffer::new(cfg, LabelSanitizer::default());
    for d in ds {
        b.insert(d.clone());
    }
    let scores = BTreeMap::from([("bed".to_string(), 1.0), ("lamp".to_string(), 0.6)]);
    b.fuse(&scores)
}

fn point(x: f64, y: f64, rel: f64) -> SemanticPoint {
    SemanticPoint {
        position: Point3::new(x, y, 0.0),
        label: "x".into(),
        relevance: rel,
        score: rel,
        confidence: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn buffer_ignores_insertion_order((ds, shuffled) in detections().prop_flat_map(|d| (Just(d.clone()), Just(d).prop_shuffle()))) {
        prop_assert_eq!(buffer_after(&ds), buffer_after(&shuffled));
    }

    #[test]
    fn fused_relevance_is_floored(s in 0.0..1.0f64, alpha in 0.1..2.0f64, floor in 1e-6..0.5f64) {
        let r = fused_relevance(s, alpha, floor);
        prop_assert!(r >= floor);
        prop_assert!(r >= alpha * s);
        prop_assert!(r == floor || r == alpha * s);
    }

    #[test]
    fn gaussian_decreases_with_distance(d1 in 0.0..10.0f64, d2 in 0.0..10.0f64, r in 0.1..5.0f64, a in 0.0..6.3f64) {
        let v = Point2::new(0.5, -1.0);
        let at = |d: f64| gaussian_weight(Point2::new(v.x + d * a.cos(), v.y + d * a.sin()), v, r);
        let (near, far) = (d1.min(d2), d1.max(d2));
        prop_assert!(at(near) >= at(far));
        prop_assert!(at(near) <= 1.0 && at(far) >= 0.0);
    }

    #[test]
    fn semantic_score_is_a_bounded_mean(
        pts in prop::collection::vec((-8.0..8.0f64, -8.0..8.0f64, 0.01..1.0f64), 1..60),
        r in 0.3..3.0f64,
    ) {
        let pts: Vec<_> = pts.into_iter().map(|(x, y, rel)| point(x, y, rel)).collect();
        let v = Point2::new(0.0, 0.0);
        let exact = viewpoint_semantic_score(v, &pts, r, false);
        let cut = viewpoint_semantic_score(v, &pts, r, true);
        prop_assert!((exact - cut).abs() <= 1e-5, "{} vs {}", exact, cut);
        let lo = pts.iter().map(|p| p.relevance).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.relevance).fold(0.0, f64::max);
        if exact > 0.0 {
            prop_assert!(exact >= lo - 1e-12 && exact <= hi + 1e-12);
        }
    }

    #[test]
    fn spl_never_exceeds_sr(eps in prop::collection::vec((any::<bool>(), 0.0..50.0f64, 0.0..50.0f64), 1..30)) {
        let rs: Vec<_> = eps
            .into_iter()
            .map(|(s, p, l)| EpisodeResult {
                success: s,
                path_length: p.max(l),
                oracle_length: l,
                steps: 0,
                termination: if s { Termination::Found } else { Termination::StepBudget },
            })
            .collect();
        let m = compute_metrics(&rs).unwrap();
        prop_assert!(m.spl <= m.sr + 1e-12);
        prop_assert!((0.0..=1.0).contains(&m.spl) && (0.0..=1.0).contains(&m.sr));
    }

    #[test]
    fn ordering_skips_worthless_and_sorts(
        rs in prop::collection::vec((0.0..5.0f64, any::<bool>(), 0u8..3, 0.0..20.0f64), 1..20),
    ) {
        let states: Vec<_> = rs
            .iter()
            .map(|r| match r.2 {
                0 => RegionState::Inactive,
                1 => RegionState::Active,
                _ => RegionState::Worthless,
            })
            .collect();
        let cost: Vec<f64> = rs.iter().map(|r| r.3).collect();
        let scores: Vec<_> = rs
            .iter()
            .enumerate()
            .map(|(i, r)| RegionScore {
                region_id: i,
                viewpoint_sum: r.0,
                semantic_sum: 0.0,
                total: r.0,
                activated: r.1,
            })
            .collect();
        let order = order_regions(&scores, &cost, &states);
        let expected = (0..rs.len()).filter(|&i| rs[i].1 && states[i] != RegionState::Worthless).count();
        prop_assert_eq!(order.len(), expected);
        for w in order.windows(2) {
            let (a, b) = (&scores[w[0]], &scores[w[1]]);
            prop_assert!(a.total > b.total || (a.total == b.total && cost[a.region_id] <= cost[b.region_id]));
        }
    }

    #[test]
    fn cache_matches_reference_model(
        ops in prop::collection::vec((any::<bool>(), 0u8..6, 0.0..20.0f64), 1..80),
        cap in 1usize..5,
    ) {
        let ttl = 30.0;
        let mut cache = LruTtlCache::new(cap, ttl);
        // Least recently used first: (key, value, inserted_at).
        let mut model: Vec<(u8, usize, f64)> = Vec::new();
        let mut now = 0.0;
        for (i, (is_put, k, dt)) in ops.into_iter().enumerate() {
            now += dt;
            if is_put {
                cache.put(k, i, now);
                model.retain(|e| e.0 != k);
                model.push((k, i, now));
                if model.len() > cap {
                    model.retain(|e| now - e.2 <= ttl);
                }
                while model.len() > cap {
                    model.remove(0);
                }
            } else {
                let want = match model.iter().position(|e| e.0 == k) {
                    Some(j) if now - model[j].2 > ttl => {
                        model.remove(j);
                        None
                    }
                    Some(j) => {
                        let e = model.remove(j);
                        model.push(e);
                        Some(e.1)
                    }
                    None => None,
                };
                prop_assert_eq!(cache.get(&k, now), want);
            }
            prop_assert!(cache.len() <= cap);
            prop_assert_eq!(cache.keys_by_recency().copied().collect::<Vec<_>>(), model.iter().map(|e| e.0).collect::<Vec<_>>());
        }
    }

    #[test]
    fn config_round_trips(tau in 0.05..1.0f64, n in 2usize..40, l1 in 0.001..1.0f64, rxy in 0.2..4.0f64, verbose in any::<bool>()) {
        let mut c = RunConfig::desk_scale();
        c.coverage.tau = tau;
        c.coverage.n = n;
        c.sampler.lambda1 = l1;
        c.evaluator.r_xy = rxy;
        c.sim.verbose_trace = verbose;
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        prop_assert_eq!(back, c);
    }
}
