//! The closed perceive → buffer → score → plan → move loop.

use std::collections::VecDeque;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::detect::detect;
use super::metrics::{oracle_shortest, EpisodeResult, Termination};
use super::policy::Policy;
use super::scenario::LoadedScenario;
use super::trace::{
    bitmap_hex, write_record, MemorySnapshot, PlanMode, PlanRecord, ResultRecord, StepRecord, TraceHeader,
    TraceRecord, TRACE_VERSION,
};
use crate::config::{BackendKind, RelevanceConfig, RunConfig, TableKind};
use crate::coverage::{estimate_heading, CoverageMemory};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Pose};
use crate::region::{order_regions, region_score, score_semantics, two_phase_search, RegionScore, SearchOutcome};
use crate::relevance::{
    CooccurrenceTable, DegradationEvent, LabelSanitizer, MockBackend, RelevanceEngine, RemoteBackend,
    RemoteConfig,
};
use crate::semantic_buffer::{SemanticBuffer, SemanticPoint};
use crate::viewpoint::{mix_seed, sample_viewpoints, score_all, select_and_link, Viewpoint};
use crate::world::{reveal, DistanceField, OccupancyGrid, Partition, PathMode, RayScratch, RegionId};

/// Mock backend matching the relevance settings.
pub fn mock_backend(cfg: &RelevanceConfig) -> MockBackend {
    MockBackend {
        table: match cfg.table {
            TableKind::Household => CooccurrenceTable::household(),
            TableKind::AllUnrelated => CooccurrenceTable::new(),
        },
        bands: cfg.bands,
        point: cfg.band_point,
        ..MockBackend::household()
    }
}

/// Relevance engine for one episode. A remote backend without a configured
/// endpoint degrades to the mock.
pub fn build_engine(cfg: &RelevanceConfig) -> RelevanceEngine {
    let mock = mock_backend(cfg);
    match cfg.backend {
        BackendKind::Remote => match RemoteConfig::from_env() {
            Some(mut rc) => {
                rc.timeout = std::time::Duration::from_secs_f64(cfg.timeout);
                let backend = RemoteBackend::new(rc, cfg.bands, mock.vocabulary.labels());
                RelevanceEngine::new(Box::new(backend), mock, LabelSanitizer::default(), cfg.cache)
            }
            None => RelevanceEngine::with_mock(mock, LabelSanitizer::default(), cfg.cache),
        },
        BackendKind::Mock => RelevanceEngine::with_mock(mock, LabelSanitizer::default(), cfg.cache),
    }
}

/// Everything an episode produces besides its trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub result: EpisodeResult,
    pub target: Option<String>,
    /// Region ordering of every planning cycle, in order.
    pub orders: Vec<Vec<RegionId>>,
    pub degradations: Vec<DegradationEvent>,
}

struct Planned {
    record: PlanRecord,
    path: VecDeque<usize>,
    commit: Option<Point2>,
}

struct Episode<'a> {
    sc: &'a LoadedScenario,
    cfg: &'a RunConfig,
    policy: Policy,
    seed: u64,
    target: String,
    grid: OccupancyGrid,
    partition: Partition,
    cell_regions: Vec<RegionId>,
    memory: CoverageMemory,
    buffer: SemanticBuffer,
    engine: RelevanceEngine,
    detect_rng: ChaCha8Rng,
    policy_rng: ChaCha8Rng,
    scratch: RayScratch,
    pose: Pose,
    cell: usize,
    time: f64,
    target_seen: bool,
    path: VecDeque<usize>,
    commit: Option<Point2>,
    frontier_goal: Option<usize>,
    orders: Vec<Vec<RegionId>>,
}

impl<'a> Episode<'a> {
    fn perceive(&mut self) -> (Vec<usize>, Vec<crate::semantic_buffer::Detection>, bool) {
        let revealed = reveal(&mut self.grid, &self.pose, &self.cfg.world.lidar);
        let eye = self.pose.position();
        let dets = detect(
            eye,
            self.pose.heading,
            &self.sc.scenario.objects,
            &self.grid,
            &self.cfg.coverage.fov,
            &self.cfg.detector,
            self.time,
            &mut self.detect_rng,
        );
        for d in &dets {
            if d.label == self.target {
                self.target_seen = true;
            }
            self.buffer.insert(d.clone());
        }
        self.buffer.evict_expired(self.time);
        let region = self.cell_regions[self.cell];
        let fov_grid = self.cfg.coverage.fov.occlusion.then_some(&self.grid);
        let crossed = self
            .memory
            .update(region, eye, self.pose.heading, fov_grid)
            .is_some();
        (revealed, dets, crossed)
    }

    fn fused_points(&self) -> Vec<SemanticPoint> {
        let labels = self.buffer.labels();
        let scores = self.engine.score(&labels, &self.target, self.time);
        self.buffer.fuse(&scores)
    }

    /// Reachable known-free cell to stand on when approaching `q`.
    fn approach_cell(&self, field: &DistanceField, q: Point2) -> Option<usize> {
        let radius = 0.75 * self.success_distance();
        let mut best: Option<(bool, f64, f64, usize)> = None;
        for c in 0..self.grid.len() {
            if !field.reachable(c) {
                continue;
            }
            let d = self.grid.center(c).dist(&q);
            let inside = d <= radius;
            // Inside the radius: cheapest path. Otherwise: closest to q.
            let key = if inside { (true, field.distance(c), d) } else { (false, d, field.distance(c)) };
            let better = match best {
                None => true,
                Some((bi, b1, b2, _)) => {
                    (inside && !bi) || (inside == bi && (key.1 < b1 || (key.1 == b1 && key.2 < b2)))
                }
            };
            if better {
                best = Some((key.0, key.1, key.2, c));
            }
        }
        best.map(|b| b.3)
    }

    fn success_distance(&self) -> f64 {
        self.cfg
            .sim
            .success_distance
            .unwrap_or(self.sc.scenario.success_distance)
    }

    fn path_from(field: &DistanceField, goal: usize) -> VecDeque<usize> {
        field
            .path_to(goal)
            .map(|p| p.cells.into_iter().skip(1).collect())
            .unwrap_or_default()
    }

    fn polyline(&self, path: &VecDeque<usize>) -> Vec<Point2> {
        std::iter::once(self.cell)
            .chain(path.iter().copied())
            .map(|c| self.grid.center(c))
            .collect()
    }

    fn empty_record(mode: PlanMode) -> PlanRecord {
        PlanRecord {
            mode,
            region_scores: Vec::new(),
            order: Vec::new(),
            target_region: None,
            goal: None,
            route: Vec::new(),
            viewpoints: Vec::new(),
            points: Vec::new(),
            bitmaps: Vec::new(),
        }
    }

    fn plan(&mut self) -> Planned {
        let field = DistanceField::compute(&self.grid, self.cell, PathMode::KnownFreeOnly);
        let semantic = self.policy.uses_semantics();
        let points = self.fused_points();
        let verbose = self.cfg.sim.verbose_trace;

        // Committed goal from an earlier short-circuit.
        if let Some(q) = self.commit {
            if let Some(goal) = self.approach_cell(&field, q) {
                if goal != self.cell {
                    let path = Self::path_from(&field, goal);
                    let mut record = Self::empty_record(PlanMode::ShortCircuit);
                    record.goal = Some(q);
                    record.route = self.polyline(&path);
                    return Planned { record, path, commit: Some(q) };
                }
            }
        }

        // Phase one. Every policy heads straight for a sighted target; the full
        // method also accepts any point above the threshold.
        let phase1: Vec<SemanticPoint> = if semantic {
            points.clone()
        } else {
            points.iter().filter(|p| p.label == self.target).cloned().collect()
        };
        let mut best: Option<(f64, f64, SemanticPoint)> = None;
        for r in self.partition.regions() {
            if let SearchOutcome::ShortCircuit { point, relevance } =
                two_phase_search(&r.bounds, &phase1, &self.cfg.evaluator)
            {
                let Some(c) = self.approach_cell(&field, point.position.planar()) else {
                    continue;
                };
                let cost = field.distance(c);
                if best.as_ref().is_none_or(|(br, bc, _)| relevance > *br || (relevance == *br && cost < *bc)) {
                    best = Some((relevance, cost, point));
                }
            }
        }
        if let Some((_, _, point)) = best {
            let q = point.position.planar();
            if let Some(goal) = self.approach_cell(&field, q) {
                if goal != self.cell {
                    let path = Self::path_from(&field, goal);
                    let mut record = Self::empty_record(PlanMode::ShortCircuit);
                    record.goal = Some(q);
                    record.route = self.polyline(&path);
                    if verbose {
                        record.points = points;
                    }
                    return Planned { record, path, commit: Some(q) };
                }
            }
        }

        match self.policy {
            Policy::NearestFrontier => self.plan_frontier(&field, false),
            Policy::RandomFrontier => self.plan_frontier(&field, true),
            Policy::GeometricOnly | Policy::Full => self.plan_regions(&field, if semantic { points } else { Vec::new() }),
        }
    }

    fn plan_frontier(&mut self, field: &DistanceField, random: bool) -> Planned {
        let grid = &self.grid;
        let goal = if random {
            let keep = self
                .frontier_goal
                .filter(|&g| g != self.cell && grid.is_frontier(g) && field.reachable(g));
            keep.or_else(|| {
                let pool: Vec<usize> = (0..grid.len())
                    .filter(|&c| c != self.cell && grid.is_frontier(c) && field.reachable(c))
                    .collect();
                (!pool.is_empty()).then(|| pool[self.policy_rng.random_range(0..pool.len())])
            })
        } else {
            field.nearest(|c| c != self.cell && grid.is_frontier(c))
        };
        self.frontier_goal = goal;
        match goal {
            Some(g) => {
                let path = Self::path_from(field, g);
                let mut record = Self::empty_record(PlanMode::Frontier);
                record.goal = Some(self.grid.center(g));
                record.route = self.polyline(&path);
                Planned { record, path, commit: None }
            }
            None => Planned {
                record: Self::empty_record(PlanMode::NoPlan),
                path: VecDeque::new(),
                commit: None,
            },
        }
    }

    fn plan_regions(&mut self, field: &DistanceField, points: Vec<SemanticPoint>) -> Planned {
        let mut sampler = self.cfg.sampler;
        let mut evaluator = self.cfg.evaluator;
        if !self.policy.uses_semantics() {
            sampler.lambda2 = 0.0;
            evaluator.semantic_sum = Default::default();
        }
        let states = self.memory.states();
        let n = self.partition.len();
        let mut path_cost = vec![f64::INFINITY; n];
        for c in 0..self.grid.len() {
            if field.reachable(c) {
                let r = self.cell_regions[c];
                path_cost[r] = path_cost[r].min(field.distance(c));
            }
        }
        let mut scores: Vec<RegionScore> = Vec::with_capacity(n);
        let mut per_region: Vec<Vec<Viewpoint>> = Vec::with_capacity(n);
        for r in 0..n {
            let mut vps = if states[r] == crate::coverage::RegionState::Worthless || path_cost[r].is_infinite() {
                Vec::new()
            } else {
                sample_viewpoints(r, &self.partition, &self.grid, &sampler, self.seed)
            };
            score_all(&mut vps, &self.grid, &points, &sampler, &mut self.scratch);
            // Only viewpoints that would reveal something are candidates.
            vps.retain(|v| v.s_cov > 0);
            score_semantics(&mut vps, &points, &evaluator);
            scores.push(region_score(r, &vps, &evaluator));
            per_region.push(vps);
        }
        let order = order_regions(&scores, &path_cost, &states);
        self.orders.push(order.clone());

        let mut chosen = None;
        for &r in &order {
            let useful: Vec<Viewpoint> = per_region[r]
                .iter()
                .filter(|v| self.grid.cell_at(v.position) != Some(self.cell))
                .cloned()
                .collect();
            let route = select_and_link(&useful, &self.grid, field, sampler.keep_k);
            if !route.is_empty() {
                chosen = Some((r, route));
                break;
            }
        }

        let mut planned = match chosen {
            Some((r, route)) => {
                let path: VecDeque<usize> = route
                    .legs
                    .iter()
                    .flat_map(|l| l.cells.iter().skip(1).copied())
                    .collect();
                let mut record = Self::empty_record(PlanMode::Region);
                record.target_region = Some(r);
                record.goal = route.stops.first().map(|v| v.position);
                record.route = self.polyline(&path);
                Planned { record, path, commit: None }
            }
            None => self.plan_frontier(field, false),
        };
        planned.record.region_scores = scores;
        planned.record.order = order;
        if self.cfg.sim.verbose_trace {
            planned.record.viewpoints = per_region.into_iter().flatten().collect();
            planned.record.points = points;
            planned.record.bitmaps = self.memory.regions().iter().map(|m| bitmap_hex(&m.bitmap)).collect();
        }
        planned
    }

    fn snapshot(&self) -> MemorySnapshot {
        MemorySnapshot {
            states: self.memory.states(),
            coverage: (0..self.partition.len()).map(|r| self.memory.coverage_ratio(r)).collect(),
        }
    }

    fn reached_target(&self) -> bool {
        let p = self.pose.position();
        let r = self.success_distance();
        self.target_seen
            && self
                .sc
                .scenario
                .objects
                .iter()
                .any(|o| o.label == self.target && o.planar().dist(&p) <= r)
    }
}

/// Runs one episode. `seed` drives the start pose (when the scenario has none),
/// detector noise, viewpoint sampling and random baselines. With `trace`, one
/// JSON record per line is written: header, one per step, result.
pub fn run_episode(
    sc: &LoadedScenario,
    policy: Policy,
    cfg: &RunConfig,
    seed: u64,
    mut trace: Option<&mut dyn Write>,
) -> Result<EpisodeOutcome> {
    let io = |e: std::io::Error| Error::io("<trace>", e);
    let grid = {
        let g = &sc.grid;
        OccupancyGrid::from_truth(
            g.width(),
            g.height(),
            g.cell_size(),
            g.origin(),
            &(0..g.len()).map(|c| !g.is_traversable(c, PathMode::GroundTruth)).collect::<Vec<_>>(),
        )?
    };
    let partition = crate::world::partition(grid.bounds(), cfg.world.region_size)?;
    let engine = build_engine(&cfg.relevance);
    let start = sc.start_pose(seed);
    let success_distance = cfg.sim.success_distance.unwrap_or(sc.scenario.success_distance);
    let max_steps = cfg.sim.max_steps.unwrap_or(sc.scenario.max_steps);
    let target = engine.parse_instruction(&sc.scenario.instruction, 0.0).ok();

    let goals: Vec<Point2> = sc
        .scenario
        .objects
        .iter()
        .filter(|o| Some(&o.label) == target.as_ref())
        .map(|o| o.planar())
        .collect();
    let oracle_length = oracle_shortest(&sc.grid, start.position(), &goals, success_distance);

    if let Some(w) = trace.as_deref_mut() {
        write_record(
            w,
            &TraceRecord::Header(TraceHeader {
                version: TRACE_VERSION,
                scenario: sc.scenario.name.clone(),
                policy,
                seed,
                instruction: sc.scenario.instruction.clone(),
                target: target.clone(),
                map: sc.grid.to_raster(),
                objects: sc.scenario.objects.clone(),
                regions: partition.regions().iter().map(|r| r.bounds).collect(),
                start,
                success_distance,
            }),
        )
        .map_err(io)?;
    }

    let finish = |result: EpisodeResult, degradations: Vec<DegradationEvent>, trace: Option<&mut dyn Write>| -> Result<()> {
        if let Some(w) = trace {
            write_record(w, &TraceRecord::Result(ResultRecord { result, degradations })).map_err(io)?;
            w.flush().map_err(io)?;
        }
        Ok(())
    };

    let Some(target) = target else {
        let result = EpisodeResult {
            success: false,
            path_length: 0.0,
            oracle_length,
            steps: 0,
            termination: Termination::NoPlan,
        };
        let degradations = engine.degradations();
        finish(result.clone(), degradations.clone(), trace)?;
        return Ok(EpisodeOutcome {
            result,
            target: None,
            orders: Vec::new(),
            degradations,
        });
    };

    let cell = grid.cell_at(start.position()).expect("start checked on load");
    let cell_regions = partition.cell_regions(&grid);
    let memory = CoverageMemory::new(&partition, cfg.coverage);
    let mut ep = Episode {
        sc,
        cfg,
        policy,
        seed,
        target: target.clone(),
        grid,
        cell_regions,
        memory,
        buffer: SemanticBuffer::new(cfg.buffer, LabelSanitizer::default()),
        engine,
        detect_rng: ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xD7EC)),
        policy_rng: ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x9011)),
        scratch: RayScratch::default(),
        pose: start,
        cell,
        time: 0.0,
        target_seen: false,
        path: VecDeque::new(),
        commit: None,
        frontier_goal: None,
        orders: Vec::new(),
        partition,
    };
    let dt = ep.grid.cell_size() / cfg.sim.speed;
    let mut path_length = 0.0;
    let mut since_plan = 0usize;
    let mut need_plan = true;

    let (revealed, detections, _) = ep.perceive();
    let mut step = 0usize;
    let mut termination = None;
    let mut pending = Some((revealed, detections));

    loop {
        let mut plan_record = None;
        if termination.is_none() && max_steps > 0 && ep.reached_target() {
            termination = Some(Termination::Found);
        }
        if termination.is_none() && step >= max_steps {
            termination = Some(Termination::StepBudget);
        }
        if termination.is_none() && (need_plan || ep.path.is_empty() || since_plan >= cfg.sim.replan_every) {
            let planned = ep.plan();
            ep.path = planned.path;
            ep.commit = planned.commit;
            since_plan = 0;
            need_plan = false;
            if ep.path.is_empty() {
                termination = Some(Termination::NoPlan);
            }
            plan_record = Some(planned.record);
        }
        if let Some((revealed, detections)) = pending.take() {
            if let Some(w) = trace.as_deref_mut() {
                let rec = StepRecord {
                    step,
                    time: ep.time,
                    pose: ep.pose,
                    region: ep.cell_regions[ep.cell],
                    revealed,
                    detections,
                    target_seen: ep.target_seen,
                    plan: plan_record,
                    memory: ep.snapshot(),
                };
                write_record(w, &TraceRecord::Step(rec)).map_err(io)?;
            }
        }
        if termination.is_some() {
            break;
        }

        let next = ep.path.pop_front().expect("non-empty path");
        let from = ep.grid.center(ep.cell);
        let to = ep.grid.center(next);
        path_length += from.dist(&to);
        let heading = estimate_heading(from, to, ep.pose.heading, cfg.coverage.fov.min_displacement);
        ep.pose = Pose::new(to.x, to.y, heading);
        ep.cell = next;
        step += 1;
        since_plan += 1;
        ep.time = step as f64 * dt;
        let (revealed, detections, crossed) = ep.perceive();
        if crossed {
            need_plan = true;
        }
        if ep.commit.is_some() && ep.path.is_empty() {
            // Arrived without success: look again from scratch.
            ep.commit = None;
        }
        pending = Some((revealed, detections));
    }

    let termination = termination.expect("loop exits with a termination");
    let result = EpisodeResult {
        success: termination == Termination::Found,
        path_length,
        oracle_length,
        steps: step,
        termination,
    };
    let degradations = ep.engine.degradations();
    finish(result.clone(), degradations.clone(), trace)?;
    Ok(EpisodeOutcome {
        result,
        target: Some(target),
        orders: ep.orders,
        degradations,
    })
}

/// Convenience wrapper collecting the trace into memory.
pub fn run_episode_traced(
    sc: &LoadedScenario,
    policy: Policy,
    cfg: &RunConfig,
    seed: u64,
) -> Result<(EpisodeOutcome, Vec<u8>)> {
    let mut buf = Vec::new();
    let out = run_episode(sc, policy, cfg, seed, Some(&mut buf))?;
    Ok((out, buf))
}
