//! Mission scenarios: launch positions, waypoint map and chemical ground truth.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar position in meters, serialised as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point(pub f64, pub f64);

impl Point {
    pub fn distance(self, other: Point) -> f64 {
        (self.0 - other.0).hypot(self.1 - other.1)
    }

    /// Moves toward `target` by at most `step`, stopping on it.
    pub fn step_toward(self, target: Point, step: f64) -> Point {
        let d = self.distance(target);
        if d <= step || d == 0.0 {
            return target;
        }
        let t = step / d;
        Point(
            self.0 + (target.0 - self.0) * t,
            self.1 + (target.1 - self.1) * t,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "agents")]
    pub agent_starts: Vec<Point>,
    pub waypoints: Vec<Point>,
    /// Indices of waypoints where the chemical is present.
    pub chemical: BTreeSet<usize>,
    /// Agent speed in m/s.
    #[serde(rename = "speed")]
    pub agent_speed: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Parameters for [`Scenario::random`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomScenario {
    pub agents: usize,
    pub waypoints: usize,
    pub chemical: usize,
    /// Side of the square map in meters.
    pub map_size: f64,
    pub speed: f64,
    /// Common launch site shared by every agent.
    pub launch: Point,
}

impl Default for RandomScenario {
    fn default() -> Self {
        Self {
            agents: 3,
            waypoints: 12,
            chemical: 3,
            map_size: 200.0,
            speed: 5.0,
            launch: Point(0.0, 0.0),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.agent_starts.is_empty() || self.waypoints.is_empty() {
            return Err(Error::InvalidScenario(
                "need at least one agent and one waypoint".into(),
            ));
        }
        let finite = |p: &Point| p.0.is_finite() && p.1.is_finite();
        if !self.agent_starts.iter().chain(&self.waypoints).all(finite) {
            return Err(Error::InvalidScenario("positions must be finite".into()));
        }
        if let Some(&bad) = self.chemical.iter().find(|&&c| c >= self.waypoints.len()) {
            return Err(Error::InvalidScenario(format!(
                "chemical index {bad} out of range (have {} waypoints)",
                self.waypoints.len()
            )));
        }
        if !(self.agent_speed.is_finite() && self.agent_speed > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "speed must be > 0, got {}",
                self.agent_speed
            )));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::parse(text, Path::new("<inline>"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::ScenarioRead {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::ScenarioParse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    /// Waypoints uniform on a square map, a random subset marked chemical,
    /// every agent launching from the same site.
    pub fn random(seed: u64, spec: &RandomScenario) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waypoints = (0..spec.waypoints)
            .map(|_| {
                Point(
                    rng.gen_range(0.0..spec.map_size),
                    rng.gen_range(0.0..spec.map_size),
                )
            })
            .collect();
        let chemical = rand::seq::index::sample(&mut rng, spec.waypoints, spec.chemical)
            .into_iter()
            .collect();
        Self {
            agent_starts: vec![spec.launch; spec.agents],
            waypoints,
            chemical,
            agent_speed: spec.speed,
            seed,
        }
    }

    /// Diagonal of the bounding box of every start and waypoint (1 m minimum).
    pub fn map_diagonal(&self) -> f64 {
        let points = self.agent_starts.iter().chain(&self.waypoints);
        let (mut lo, mut hi) = (
            Point(f64::INFINITY, f64::INFINITY),
            Point(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo = Point(lo.0.min(p.0), lo.1.min(p.1));
            hi = Point(hi.0.max(p.0), hi.1.max(p.1));
        }
        lo.distance(hi).max(1.0)
    }
}
