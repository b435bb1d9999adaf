//! Deterministic stand-in for the language model: a directional co-occurrence
//! table for scoring and a vocabulary rule table for instruction parsing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, RelevanceBackend};
use super::bands::{Band, BandPoint, BandTable};

/// A group of objects that typically share a room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneKit {
    pub name: String,
    pub labels: Vec<String>,
}

impl SceneKit {
    pub fn new(name: &str, labels: &[&str]) -> Self {
        Self {
            name: name.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn household_kits() -> Vec<SceneKit> {
    vec![
        SceneKit::new(
            "office",
            &["desk", "monitor", "keyboard", "office_chair", "printer", "bookshelf"],
        ),
        SceneKit::new(
            "bedroom",
            &["bed", "pillow", "nightstand", "wardrobe", "lamp", "dresser"],
        ),
        SceneKit::new(
            "kitchen",
            &["refrigerator", "stove", "sink", "microwave", "table", "chair"],
        ),
        SceneKit::new(
            "living_room",
            &["sofa", "television", "coffee_table", "armchair", "potted_plant", "rug"],
        ),
        SceneKit::new(
            "bathroom",
            &["toilet", "bathtub", "towel", "mirror", "shower", "washbasin"],
        ),
        SceneKit::new(
            "storage",
            &["box", "shelf", "ladder", "vacuum_cleaner", "toolbox", "bucket"],
        ),
        SceneKit::new(
            "hallway",
            &["fire_extinguisher", "exit_sign", "coat_rack", "shoe_rack"],
        ),
    ]
}

/// Kit pairs whose members are related but not co-located.
pub fn household_kit_relations() -> Vec<(&'static str, &'static str, Band)> {
    vec![
        ("kitchen", "living_room", Band::SceneRelated),
        ("bedroom", "bathroom", Band::SceneRelated),
        ("office", "living_room", Band::WeaklyRelated),
        ("office", "bedroom", Band::WeaklyRelated),
        ("storage", "hallway", Band::WeaklyRelated),
    ]
}

pub fn household_aliases() -> Vec<(&'static str, &'static str)> {
    vec![
        ("tv", "television"),
        ("fridge", "refrigerator"),
        ("couch", "sofa"),
        ("extinguisher", "fire_extinguisher"),
        ("plant", "potted_plant"),
        ("screen", "monitor"),
        ("closet", "wardrobe"),
        ("tub", "bathtub"),
    ]
}

/// `(label, target) → band`; lookups are directional and default to `Unrelated`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CooccurrenceTable {
    entries: BTreeMap<(String, String), Band>,
}

impl CooccurrenceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, label: &str, target: &str, band: Band) {
        self.entries.insert((label.into(), target.into()), band);
    }

    pub fn band(&self, label: &str, target: &str) -> Band {
        self.entries
            .get(&(label.to_string(), target.to_string()))
            .copied()
            .unwrap_or(Band::Unrelated)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &Band)> {
        self.entries.iter()
    }

    /// Same-kit pairs are `SameSceneStrong`; related kits get their declared band
    /// in both directions.
    pub fn from_kits(kits: &[SceneKit], relations: &[(&str, &str, Band)]) -> Self {
        let mut t = Self::new();
        for kit in kits {
            for a in &kit.labels {
                for b in &kit.labels {
                    if a != b {
                        t.set(a, b, Band::SameSceneStrong);
                    }
                }
            }
        }
        let find = |name: &str| kits.iter().find(|k| k.name == name);
        for &(ka, kb, band) in relations {
            let (Some(ka), Some(kb)) = (find(ka), find(kb)) else {
                continue;
            };
            for a in &ka.labels {
                for b in &kb.labels {
                    t.set(a, b, band);
                    t.set(b, a, band);
                }
            }
        }
        t
    }

    pub fn household() -> Self {
        Self::from_kits(&household_kits(), &household_kit_relations())
    }
}

/// Object vocabulary plus free-text aliases for instruction parsing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    /// phrase tokens → canonical label
    phrases: Vec<(Vec<String>, String)>,
}

fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

impl Vocabulary {
    pub fn new<'a, L, A>(labels: L, aliases: A) -> Self
    where
        L: IntoIterator<Item = &'a str>,
        A: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut v = Self::default();
        for l in labels {
            v.add(l, l);
        }
        for (alias, label) in aliases {
            v.add(alias, label);
        }
        v
    }

    pub fn household() -> Self {
        let kits = household_kits();
        let labels: Vec<&str> = kits
            .iter()
            .flat_map(|k| k.labels.iter().map(String::as_str))
            .collect();
        Self::new(labels, household_aliases())
    }

    pub fn add(&mut self, phrase: &str, label: &str) {
        let toks = tokenize(phrase);
        if !toks.is_empty() {
            self.phrases.push((toks, label.to_string()));
        }
    }

    /// Distinct canonical labels, sorted.
    pub fn labels(&self) -> Vec<String> {
        let mut l: Vec<String> = self.phrases.iter().map(|(_, l)| l.clone()).collect();
        l.sort();
        l.dedup();
        l
    }

    pub fn contains_label(&self, label: &str) -> bool {
        self.phrases.iter().any(|(_, l)| l == label)
    }

    /// Longest vocabulary phrase found in `text` (ties: earliest position).
    /// A trailing plural `s` on the last word is accepted.
    pub fn resolve(&self, text: &str) -> Option<String> {
        let toks = tokenize(text);
        let mut best: Option<(usize, usize, &str)> = None;
        for (phrase, label) in &self.phrases {
            let n = phrase.len();
            if n > toks.len() {
                continue;
            }
            for start in 0..=toks.len() - n {
                let hit = phrase.iter().enumerate().all(|(i, p)| {
                    let t = &toks[start + i];
                    t == p || (i == n - 1 && t.strip_suffix('s') == Some(p.as_str()))
                });
                if hit {
                    let better = match best {
                        None => true,
                        Some((bn, bs, _)) => n > bn || (n == bn && start < bs),
                    };
                    if better {
                        best = Some((n, start, label));
                    }
                    break;
                }
            }
        }
        best.map(|(_, _, l)| l.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockBackend {
    pub table: CooccurrenceTable,
    pub vocabulary: Vocabulary,
    pub bands: BandTable,
    pub point: BandPoint,
}

impl Default for MockBackend {
    fn default() -> Self {
        Self::household()
    }
}

impl MockBackend {
    pub fn household() -> Self {
        Self {
            table: CooccurrenceTable::household(),
            vocabulary: Vocabulary::household(),
            bands: BandTable::default(),
            point: BandPoint::Midpoint,
        }
    }

    /// Every pair `Unrelated` and scored at the band floor (zero).
    pub fn all_unrelated_zero() -> Self {
        Self {
            table: CooccurrenceTable::new(),
            point: BandPoint::LowerBound,
            ..Self::household()
        }
    }

    pub fn score_one(&self, label: &str, target: &str) -> f64 {
        if label == target {
            return 1.0;
        }
        self.bands.value(self.table.band(label, target), self.point)
    }
}

impl RelevanceBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn parse_instruction(&self, text: &str) -> Result<String, BackendError> {
        self.vocabulary.resolve(text).ok_or(BackendError::NoLabel)
    }

    fn score(&self, labels: &[String], target: &str) -> Result<BTreeMap<String, f64>, BackendError> {
        Ok(labels
            .iter()
            .map(|l| (l.clone(), self.score_one(l, target)))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_instruction_variants() {
        let v = Vocabulary::household();
        assert_eq!(v.resolve("Help me find the fire_extinguisher").as_deref(), Some("fire_extinguisher"));
        assert_eq!(v.resolve("Help me find the fire extinguisher").as_deref(), Some("fire_extinguisher"));
        assert_eq!(v.resolve("I want to find a table").as_deref(), Some("table"));
        assert_eq!(v.resolve("Someone might need a chair").as_deref(), Some("chair"));
        assert_eq!(v.resolve("Help me find the monitor").as_deref(), Some("monitor"));
        assert_eq!(v.resolve("grab the office chair").as_deref(), Some("office_chair"));
        assert_eq!(v.resolve("where is the TV").as_deref(), Some("television"));
        assert_eq!(v.resolve("find two lamps").as_deref(), Some("lamp"));
        assert_eq!(v.resolve("asdf qwerty"), None);
    }

    #[test]
    fn table_is_directional_with_unrelated_default() {
        let mut t = CooccurrenceTable::new();
        t.set("keyboard", "monitor", Band::SameSceneStrong);
        assert_eq!(t.band("keyboard", "monitor"), Band::SameSceneStrong);
        assert_eq!(t.band("monitor", "keyboard"), Band::Unrelated);
    }

    #[test]
    fn household_relations() {
        let t = CooccurrenceTable::household();
        assert_eq!(t.band("keyboard", "monitor"), Band::SameSceneStrong);
        assert_eq!(t.band("sofa", "stove"), Band::SceneRelated);
        assert_eq!(t.band("desk", "bed"), Band::WeaklyRelated);
        assert_eq!(t.band("toilet", "monitor"), Band::Unrelated);
    }

    #[test]
    fn degenerate_backend_scores_zero() {
        let m = MockBackend::all_unrelated_zero();
        assert_eq!(m.score_one("keyboard", "monitor"), 0.0);
        assert_eq!(m.score_one("monitor", "monitor"), 1.0);
    }
}
