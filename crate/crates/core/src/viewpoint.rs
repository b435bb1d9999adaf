//! Candidate viewpoints: random sampling in known free space, geometric
//! coverage and semantic density scores, and short routes through the best ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Pose};
use crate::scalar::Scalar;
use crate::semantic_buffer::SemanticPoint;
use crate::world::path::{DistanceField, Path};
use crate::world::raycast::{count_unobserved_visible, RayScratch, SensorModel};
use crate::world::{OccupancyGrid, PathMode, Partition, RegionId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint<T: Scalar = f64> {
    /// Index within the region's sample list.
    pub id: usize,
    pub region: RegionId,
    pub position: Point2<T>,
    /// Unobserved cells a sensor here would newly see.
    pub s_cov: usize,
    /// Valid semantic points within the density radius.
    pub s_sem_density: usize,
    /// `lambda1 * s_cov + lambda2 * s_sem_density`.
    pub s_viewpoint: T,
    /// Gaussian-weighted semantic relevance of the neighbourhood.
    pub s_bar: T,
}

impl<T: Scalar> Viewpoint<T> {
    pub fn at(id: usize, region: RegionId, position: Point2<T>) -> Self {
        Self {
            id,
            region,
            position,
            s_cov: 0,
            s_sem_density: 0,
            s_viewpoint: T::zero(),
            s_bar: T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub samples_per_region: usize,
    /// Radius `r` of the density neighbourhood, meters.
    pub density_radius: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Sensor assumed when counting coverage gain.
    pub sensor: SensorModel,
    /// Viewpoints kept per route.
    pub keep_k: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            samples_per_region: 40,
            density_radius: 2.0,
            lambda1: 1.0,
            lambda2: 2.0,
            sensor: SensorModel::omni(4.0),
            keep_k: 5,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |name, message: &str| {
            Err(crate::Error::InvalidParameter {
                name,
                message: message.into(),
            })
        };
        if !(self.density_radius > 0.0) {
            return bad("density_radius", "must be > 0");
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return bad("lambda", "must be >= 0");
        }
        if self.lambda1 == 0.0 && self.lambda2 == 0.0 {
            return bad("lambda", "lambda1 and lambda2 cannot both be zero");
        }
        if !(self.sensor.range > 0.0) {
            return bad("sensor.range", "must be > 0");
        }
        if self.keep_k == 0 {
            return bad("keep_k", "must be >= 1");
        }
        Ok(())
    }
}

/// SplitMix64 finalizer, used to derive independent per-stream seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Up to `samples_per_region` positions drawn uniformly over the region's
/// known-free cells (uniform cell, then uniform offset inside it).
/// Reproducible per `(seed, region id)`.
pub fn sample_viewpoints(
    region: RegionId,
    partition: &Partition,
    grid: &OccupancyGrid,
    cfg: &SamplerConfig,
    seed: u64,
) -> Vec<Viewpoint> {
    let free: Vec<usize> = partition
        .region_cells(grid, region)
        .into_iter()
        .filter(|&c| grid.is_traversable(c, PathMode::KnownFreeOnly))
        .collect();
    if free.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, region as u64));
    let cs = grid.cell_size();
    (0..cfg.samples_per_region)
        .map(|k| {
            let cell = free[rng.random_range(0..free.len())];
            let c = grid.center(cell);
            let dx: f64 = rng.random_range(-0.5..0.5);
            let dy: f64 = rng.random_range(-0.5..0.5);
            Viewpoint::at(k, region, Point2::new(c.x + dx * cs, c.y + dy * cs))
        })
        .collect()
}

/// Currently unobserved cells an omnidirectional sweep from `v` would reveal.
/// Never mutates the grid.
pub fn score_coverage(
    v: Point2,
    grid: &OccupancyGrid,
    sensor: &SensorModel,
    scratch: &mut RayScratch,
    buf: &mut Vec<usize>,
) -> usize {
    let pose = Pose::new(v.x, v.y, 0.0);
    count_unobserved_visible(grid, &pose, sensor, scratch, buf)
}

/// Valid points whose planar distance to `v` is at most `r` (height ignored).
pub fn score_semantic_density<T: Scalar>(v: Point2<T>, points: &[SemanticPoint<T>], r: T) -> usize {
    let r2 = r * r;
    points
        .iter()
        .filter(|p| p.is_valid() && p.position.planar().dist_sq(&v) <= r2)
        .count()
}

pub fn score_viewpoint<T: Scalar>(s_cov: usize, s_sem_density: usize, lambda1: T, lambda2: T) -> T {
    lambda1 * T::from_count(s_cov) + lambda2 * T::from_count(s_sem_density)
}

/// Fills `s_cov`, `s_sem_density` and `s_viewpoint` for every viewpoint.
/// Coverage is evaluated from the center of the viewpoint's cell, where the
/// robot would actually stand.
pub fn score_all(
    viewpoints: &mut [Viewpoint],
    grid: &OccupancyGrid,
    points: &[SemanticPoint],
    cfg: &SamplerConfig,
    scratch: &mut RayScratch,
) {
    let mut buf = Vec::new();
    for v in viewpoints.iter_mut() {
        let eye = grid.cell_at(v.position).map_or(v.position, |c| grid.center(c));
        v.s_cov = score_coverage(eye, grid, &cfg.sensor, scratch, &mut buf);
        v.s_sem_density = score_semantic_density(v.position, points, cfg.density_radius);
        v.s_viewpoint = score_viewpoint(v.s_cov, v.s_sem_density, cfg.lambda1, cfg.lambda2);
    }
}

/// Ordered stops with the known-free path to each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub stops: Vec<Viewpoint>,
    pub legs: Vec<Path>,
}

impl Route {
    pub fn cost(&self) -> f64 {
        self.legs.iter().map(|l| l.cost).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }
}

/// Largest stop count ordered by exhaustive search; larger sets use greedy
/// nearest-neighbour.
pub const EXACT_ORDER_LIMIT: usize = 7;

/// Keeps the top `keep_k` reachable viewpoints (score descending, then id) and
/// orders them into a minimum-cost open route from the robot.
pub fn select_and_link(
    viewpoints: &[Viewpoint],
    grid: &OccupancyGrid,
    from_robot: &DistanceField,
    keep_k: usize,
) -> Route {
    let mut cands: Vec<(&Viewpoint, usize)> = viewpoints
        .iter()
        .filter_map(|v| {
            let cell = grid.cell_at(v.position)?;
            from_robot.reachable(cell).then_some((v, cell))
        })
        .collect();
    cands.sort_by(|a, b| {
        b.0.s_viewpoint
            .total_cmp(&a.0.s_viewpoint)
            .then(a.0.id.cmp(&b.0.id))
    });
    cands.truncate(keep_k);
    if cands.is_empty() {
        return Route {
            stops: Vec::new(),
            legs: Vec::new(),
        };
    }
    // Fields from every stop give the pairwise leg costs.
    let fields: Vec<DistanceField> = cands
        .iter()
        .map(|&(_, c)| DistanceField::compute(grid, c, PathMode::KnownFreeOnly))
        .collect();
    let n = cands.len();
    let start_cost: Vec<f64> = cands.iter().map(|&(_, c)| from_robot.distance(c)).collect();
    let pair = |i: usize, j: usize| fields[i].distance(cands[j].1);
    let ids: Vec<usize> = cands.iter().map(|(v, _)| v.id).collect();
    let order = if n <= EXACT_ORDER_LIMIT {
        exact_order(n, &start_cost, &pair, &ids)
    } else {
        greedy_order(n, &start_cost, &pair, &ids)
    };

    let mut legs = Vec::with_capacity(n);
    let mut prev: Option<usize> = None;
    for &i in &order {
        let leg = match prev {
            None => from_robot.path_to(cands[i].1),
            Some(p) => fields[p].path_to(cands[i].1),
        };
        legs.push(leg.expect("stops are mutually reachable"));
        prev = Some(i);
    }
    Route {
        stops: order.iter().map(|&i| cands[i].0.clone()).collect(),
        legs,
    }
}

fn greedy_order<F: Fn(usize, usize) -> f64>(n: usize, start: &[f64], pair: &F, ids: &[usize]) -> Vec<usize> {
    let mut left: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut cur: Option<usize> = None;
    while !left.is_empty() {
        let cost = |j: usize| cur.map_or(start[j], |c| pair(c, j));
        let (pos, _) = left
            .iter()
            .enumerate()
            .min_by(|a, b| cost(*a.1).total_cmp(&cost(*b.1)).then(ids[*a.1].cmp(&ids[*b.1])))
            .expect("non-empty");
        let next = left.remove(pos);
        order.push(next);
        cur = Some(next);
    }
    order
}

/// Minimum-cost open path over all permutations; ties go to the
/// lexicographically smallest id sequence.
fn exact_order<F: Fn(usize, usize) -> f64>(n: usize, start: &[f64], pair: &F, ids: &[usize]) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by_key(|&i| ids[i]);
    loop {
        let mut cost = start[perm[0]];
        for w in perm.windows(2) {
            cost += pair(w[0], w[1]);
        }
        // Permutations come in lexicographic id order, so strict `<` keeps the
        // smallest sequence among equal costs.
        if best.as_ref().is_none_or(|(bc, _)| cost < *bc - 1e-12) {
            best = Some((cost, perm.clone()));
        }
        if !next_permutation(&mut perm, ids) {
            break;
        }
    }
    best.expect("n >= 1").1
}

fn next_permutation(p: &mut [usize], ids: &[usize]) -> bool {
    let key = |i: usize| ids[i];
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && key(p[i - 1]) >= key(p[i]) {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while key(p[j]) <= key(p[i - 1]) {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::world::partition;

    fn pt(x: f64, y: f64, z: f64) -> SemanticPoint {
        SemanticPoint {
            position: Point3::new(x, y, z),
            label: "chair".into(),
            relevance: 0.5,
            score: 0.5,
            confidence: 1.0,
        }
    }

    #[test]
    fn unknown_region_yields_no_samples() {
        let g = OccupancyGrid::open(20, 20, 0.2).unwrap();
        let p = partition(g.bounds(), 2.0).unwrap();
        assert!(sample_viewpoints(0, &p, &g, &SamplerConfig::default(), 7).is_empty());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let mut g = OccupancyGrid::open(20, 20, 0.2).unwrap();
        g.observe_all();
        let p = partition(g.bounds(), 2.0).unwrap();
        let cfg = SamplerConfig::default();
        let a = sample_viewpoints(3, &p, &g, &cfg, 11);
        assert_eq!(a.len(), 40);
        assert_eq!(a, sample_viewpoints(3, &p, &g, &cfg, 11));
        assert_ne!(a, sample_viewpoints(3, &p, &g, &cfg, 12));
        assert!(a.iter().all(|v| p.region(3).contains(&v.position)));
    }

    #[test]
    fn single_free_cell_contains_every_sample() {
        let mut g = OccupancyGrid::open(10, 10, 0.2).unwrap();
        let p = partition(g.bounds(), 2.0).unwrap();
        let cell = g.id(4, 6);
        g.observe(cell);
        let cfg = SamplerConfig {
            samples_per_region: 5,
            ..SamplerConfig::default()
        };
        let vs = sample_viewpoints(0, &p, &g, &cfg, 1);
        assert_eq!(vs.len(), 5);
        assert!(vs.iter().all(|v| g.cell_at(v.position) == Some(cell)));
    }

    #[test]
    fn coverage_is_zero_once_everything_is_observed() {
        let mut g = OccupancyGrid::parse_raster("6 4 0.5\n......\n.##...\n......\n......\n").unwrap();
        g.observe_all();
        let (mut s, mut b) = (RayScratch::default(), Vec::new());
        for c in 0..g.len() {
            if g.truth(c) == crate::world::CellState::Free {
                assert_eq!(score_coverage(g.center(c), &g, &SensorModel::omni(3.0), &mut s, &mut b), 0);
            }
        }
    }

    #[test]
    fn density_examples() {
        let v = Point2::new(0.0, 0.0);
        assert_eq!(score_semantic_density(v, &[], 1.0), 0);
        assert_eq!(score_semantic_density(v, &[pt(1.0, 0.0, 0.0)], 1.0), 1);
        assert_eq!(score_semantic_density(v, &[pt(0.0, 1.0, 10.0)], 1.0), 1);
        assert_eq!(score_semantic_density(v, &[pt(0.0, 1.0 + 1e-9, 0.0)], 1.0), 0);
        let mut invalid = pt(0.1, 0.0, 0.0);
        invalid.score = 0.0;
        assert_eq!(score_semantic_density(v, &[invalid], 1.0), 0);
    }

    #[test]
    fn viewpoint_score_examples() {
        assert_eq!(score_viewpoint(7, 99, 1.0, 0.0), 7.0);
        assert_eq!(score_viewpoint(99, 3, 0.0, 1.0), 3.0);
        assert_eq!(score_viewpoint(4, 3, 0.5, 2.0), 8.0);
        assert_eq!(score_viewpoint(4usize, 3, 0.5f32, 2.0f32), 8.0f32);
    }

    fn scored(id: usize, x: f64, y: f64, s: f64) -> Viewpoint {
        Viewpoint {
            s_viewpoint: s,
            ..Viewpoint::at(id, 0, Point2::new(x, y))
        }
    }

    #[test]
    fn k1_route_is_single_best_reachable() {
        let mut g = OccupancyGrid::parse_raster("8 1 1\n....#...\n").unwrap();
        g.observe_all();
        let robot = g.id(0, 0);
        let field = DistanceField::compute(&g, robot, PathMode::KnownFreeOnly);
        let vs = vec![scored(0, 6.5, 0.5, 9.0), scored(1, 2.5, 0.5, 5.0), scored(2, 3.5, 0.5, 1.0)];
        let r = select_and_link(&vs, &g, &field, 1);
        assert_eq!(r.stops.len(), 1);
        assert_eq!(r.stops[0].id, 1);
        assert!((r.cost() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn equidistant_stops_visit_lower_id_first() {
        let mut g = OccupancyGrid::open(7, 1, 1.0).unwrap();
        g.observe_all();
        let field = DistanceField::compute(&g, g.id(3, 0), PathMode::KnownFreeOnly);
        let vs = vec![scored(4, 0.5, 0.5, 1.0), scored(2, 6.5, 0.5, 1.0)];
        let r = select_and_link(&vs, &g, &field, 2);
        assert_eq!(r.stops.iter().map(|v| v.id).collect::<Vec<_>>(), vec![2, 4]);
    }

    #[test]
    fn unreachable_candidates_are_skipped() {
        let mut g = OccupancyGrid::parse_raster("5 1 1\n..#..\n").unwrap();
        g.observe_all();
        let field = DistanceField::compute(&g, g.id(0, 0), PathMode::KnownFreeOnly);
        let r = select_and_link(&[scored(0, 4.5, 0.5, 3.0)], &g, &field, 3);
        assert!(r.is_empty());
    }

    #[test]
    fn greedy_and_exact_agree_on_a_line() {
        let start = [1.0, 2.0, 3.0];
        let pos = [1.0, 2.0, 3.0];
        let pair = |i: usize, j: usize| f64::abs(pos[i] - pos[j]);
        let ids = [0, 1, 2];
        assert_eq!(greedy_order(3, &start, &pair, &ids), vec![0, 1, 2]);
        assert_eq!(exact_order(3, &start, &pair, &ids), vec![0, 1, 2]);
    }
}
