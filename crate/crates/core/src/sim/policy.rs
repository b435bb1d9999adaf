use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Exploration policies that plug into the same episode loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Closest reachable frontier cell.
    NearestFrontier,
    /// A uniformly drawn reachable frontier cell, kept until reached.
    RandomFrontier,
    /// Region/viewpoint planner with every semantic term switched off.
    GeometricOnly,
    /// Region/viewpoint planner with semantic density and relevance.
    Full,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::NearestFrontier,
        Policy::RandomFrontier,
        Policy::GeometricOnly,
        Policy::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::NearestFrontier => "nearest_frontier",
            Policy::RandomFrontier => "random_frontier",
            Policy::GeometricOnly => "geometric_only",
            Policy::Full => "full",
        }
    }

    pub fn uses_regions(self) -> bool {
        matches!(self, Policy::GeometricOnly | Policy::Full)
    }

    pub fn uses_semantics(self) -> bool {
        self == Policy::Full
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Policy::ALL.iter().map(|p| p.name()).collect();
                format!("unknown policy {s:?}; expected one of {}", names.join(", "))
            })
    }
}

/// Every baseline plus the full method.
pub fn baseline_policies() -> [Policy; 4] {
    Policy::ALL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{}\"", p.name()));
        }
        assert!("greedy".parse::<Policy>().is_err());
    }
}
