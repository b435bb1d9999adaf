//! Procedural rooms-and-corridor scenes with semantically clustered objects.
//!
//! Two rows of rooms face a horizontal corridor. Every room has a door onto
//! the corridor and may have a door to its neighbour in the same row. Each
//! room is furnished from one scene kit, so objects that co-occur in the
//! relevance table are also placed together. Pairs of related kits share a
//! column, facing each other across the corridor.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{LoadedScenario, SceneObject, Scenario, SCENARIO_VERSION};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::relevance::mock::{household_kit_relations, household_kits};
use crate::relevance::{Band, SceneKit};
use crate::viewpoint::mix_seed;
use crate::world::OccupancyGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Rooms per row; there are always two rows.
    pub rooms_per_row: usize,
    pub room_width: f64,
    pub room_depth: f64,
    pub corridor_width: f64,
    pub door_width: f64,
    pub cell_size: f64,
    pub objects_per_room: usize,
    /// Chance of a door between neighbouring rooms.
    pub side_door_probability: f64,
    pub success_distance: f64,
    pub max_steps: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            rooms_per_row: 3,
            room_width: 4.0,
            room_depth: 4.0,
            corridor_width: 1.5,
            door_width: 1.0,
            cell_size: 0.25,
            objects_per_room: 4,
            side_door_probability: 0.5,
            success_distance: 1.0,
            max_steps: 400,
        }
    }
}

const PHRASINGS: [&str; 5] = [
    "Help me find the {}",
    "I want to find a {}",
    "Where is the {}?",
    "Someone might need a {}",
    "Go to the {}",
];

fn cells(m: f64, cs: f64) -> usize {
    (m / cs).round().max(1.0) as usize
}

/// One generated scene: the scenario (map inline) and its raster text.
#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub scenario: Scenario,
    pub raster: String,
}

impl GeneratedScene {
    pub fn load(&self) -> Result<LoadedScenario> {
        let grid = OccupancyGrid::parse_raster(&self.raster)?;
        LoadedScenario::from_parts(self.scenario.clone(), grid)
    }
}

/// Kit index per room (bottom row first). Each `related` pair fills one
/// column while columns last; the remaining kits fill the other rooms.
fn assign_kits<R: Rng>(kits: &[SceneKit], related: &[(&str, &str)], rooms_per_row: usize, rng: &mut R) -> Vec<usize> {
    let find = |name: &str| kits.iter().position(|k| k.name == name);
    let mut pairs: Vec<(usize, usize)> = related
        .iter()
        .filter_map(|&(a, b)| Some((find(a)?, find(b)?)))
        .filter(|(a, b)| a != b)
        .collect();
    pairs.shuffle(rng);
    let mut used = vec![false; kits.len()];
    let mut columns: Vec<(usize, usize)> = Vec::new();
    for (a, b) in pairs {
        if columns.len() < rooms_per_row && !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            columns.push(if rng.random_bool(0.5) { (a, b) } else { (b, a) });
        }
    }
    let mut rest: Vec<usize> = (0..kits.len()).filter(|&k| !used[k]).collect();
    rest.shuffle(rng);
    let mut rest = rest.into_iter().cycle();
    let mut cols: Vec<Option<(usize, usize)>> = columns.into_iter().map(Some).collect();
    cols.resize(rooms_per_row, None);
    cols.shuffle(rng);
    let col_kits: Vec<(usize, usize)> = cols
        .into_iter()
        .map(|c| c.unwrap_or_else(|| (rest.next().unwrap_or(0), rest.next().unwrap_or(0))))
        .collect();
    col_kits.iter().map(|c| c.0).chain(col_kits.iter().map(|c| c.1)).collect()
}

pub fn generate_scene(
    cfg: &GeneratorConfig,
    kits: &[SceneKit],
    related: &[(&str, &str)],
    name: &str,
    seed: u64,
) -> Result<GeneratedScene> {
    let n_rooms = cfg.rooms_per_row * 2;
    if cfg.rooms_per_row == 0 || kits.is_empty() {
        return Err(Error::InvalidParameter {
            name: "rooms_per_row",
            message: "need at least one room and one kit".into(),
        });
    }
    let cs = cfg.cell_size;
    let rw = cells(cfg.room_width, cs);
    let rd = cells(cfg.room_depth, cs);
    let cw = cells(cfg.corridor_width, cs);
    let dw = cells(cfg.door_width, cs).min(rw.min(rd).saturating_sub(2)).max(1);
    let width = cfg.rooms_per_row * (rw + 1) + 1;
    let height = 2 * rd + cw + 4;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x6E4E));

    let mut occ = vec![true; width * height];
    let carve = |ix: usize, iy: usize, occ: &mut Vec<bool>| occ[iy * width + ix] = false;

    // Interior spans in cell coordinates.
    let bottom = 1..1 + rd;
    let corridor = rd + 2..rd + 2 + cw;
    let top = rd + 3 + cw..rd + 3 + cw + rd;
    for x in 1..width - 1 {
        for y in corridor.clone() {
            carve(x, y, &mut occ);
        }
    }
    // (x span, y span) per room; bottom row first.
    let mut rooms = Vec::with_capacity(n_rooms);
    for row in 0..2 {
        let ys = if row == 0 { bottom.clone() } else { top.clone() };
        for c in 0..cfg.rooms_per_row {
            let x0 = 1 + c * (rw + 1);
            let xs = x0..x0 + rw;
            for x in xs.clone() {
                for y in ys.clone() {
                    carve(x, y, &mut occ);
                }
            }
            let d0 = rng.random_range(xs.start + 1..=xs.end - 1 - dw);
            let door_y = if row == 0 { rd + 1 } else { rd + 2 + cw };
            for x in d0..d0 + dw {
                carve(x, door_y, &mut occ);
            }
            if c + 1 < cfg.rooms_per_row && rng.random_bool(cfg.side_door_probability.clamp(0.0, 1.0)) {
                let s0 = rng.random_range(ys.start + 1..=ys.end - 1 - dw);
                for y in s0..s0 + dw {
                    carve(xs.end, y, &mut occ);
                }
            }
            rooms.push((xs, ys.clone()));
        }
    }
    // Raster rows are top to bottom.
    let mut raster = format!("{width} {height} {cs}\n");
    for iy in (0..height).rev() {
        for ix in 0..width {
            raster.push(if occ[iy * width + ix] { '#' } else { '.' });
        }
        raster.push('\n');
    }

    let kit_of_room = assign_kits(kits, related, cfg.rooms_per_row, &mut rng);
    let mut objects = Vec::new();
    let mut target_pool = Vec::new();
    for (r, (xs, ys)) in rooms.iter().enumerate() {
        let kit = &kits[kit_of_room[r]];
        let mut labels: Vec<&String> = kit.labels.iter().collect();
        labels.shuffle(&mut rng);
        labels.truncate(cfg.objects_per_room);
        let mut spots: Vec<(usize, usize)> = (xs.start + 1..xs.end - 1)
            .flat_map(|x| (ys.start + 1..ys.end - 1).map(move |y| (x, y)))
            .collect();
        spots.shuffle(&mut rng);
        for (label, (x, y)) in labels.into_iter().zip(spots) {
            let jx: f64 = rng.random_range(-0.3..0.3);
            let jy: f64 = rng.random_range(-0.3..0.3);
            let p = Point2::new((x as f64 + 0.5 + jx) * cs, (y as f64 + 0.5 + jy) * cs);
            target_pool.push(objects.len());
            objects.push(SceneObject {
                label: label.clone(),
                x: p.x,
                y: p.y,
                z: 0.5,
            });
        }
    }
    // Targets must be unique in the scene so the goal is unambiguous.
    target_pool.retain(|&i| objects.iter().filter(|o| o.label == objects[i].label).count() == 1);
    if target_pool.is_empty() {
        return Err(Error::Scenario("no uniquely labelled object to use as target".into()));
    }
    let target = &objects[target_pool[rng.random_range(0..target_pool.len())]];
    let phrase = PHRASINGS[rng.random_range(0..PHRASINGS.len())];
    let instruction = phrase.replace("{}", &target.label.replace('_', " "));

    Ok(GeneratedScene {
        scenario: Scenario {
            version: SCENARIO_VERSION,
            name: name.into(),
            map_file: None,
            map: Some(raster.clone()),
            objects,
            start: None,
            instruction,
            success_distance: cfg.success_distance,
            max_steps: cfg.max_steps,
            seed,
        },
        raster,
    })
}

/// `count` scenes named `scene_000`, `scene_001`, ... from `seed`.
pub fn generate_household(cfg: &GeneratorConfig, count: usize, seed: u64) -> Result<Vec<GeneratedScene>> {
    let kits = household_kits();
    let related: Vec<(&str, &str)> = household_kit_relations()
        .into_iter()
        .filter(|r| r.2 == Band::SceneRelated)
        .map(|r| (r.0, r.1))
        .collect();
    (0..count)
        .map(|i| generate_scene(cfg, &kits, &related, &format!("scene_{i:03}"), mix_seed(seed, i as u64)))
        .collect()
}
