//! Reusable experiment drivers shared by the CLI, the acceptance suite and
//! the FFI layer.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamic::{EdgeUpdate, EventSource, LoopView, SourcePoll, SwarmEvent};
use crate::error::Result;
use crate::model::{Assignment, Matrix, Problem, UtilityParams};
use crate::sim::{run_mission, Allocator, MissionReport, RandomScenario, Scenario, SimConfig};

/// Matching-mode instance with integer rates drawn uniformly from `1..=10`.
pub fn random_integer_problem(
    rng: &mut impl Rng,
    agents: usize,
    waypoints: usize,
) -> Result<Problem> {
    let mut draw = || {
        let data = (0..agents * waypoints)
            .map(|_| f64::from(rng.gen_range(1..=10u8)))
            .collect();
        Matrix::from_row_major(agents, waypoints, data)
    };
    let gamma = draw()?;
    let delta = draw()?;
    Problem::matching(UtilityParams::new(gamma, delta))
}

/// What the network looked like when an epoch settled.
#[derive(Debug, Clone)]
pub struct SettledEpoch {
    pub problem: Problem,
    pub assignment: Assignment,
    /// Solver iteration at which the settlement was observed.
    pub iteration: usize,
}

/// Replays the periodic-update protocol: every `interval` solver iterations
/// one agent (round robin) reaches its assigned waypoint and every surviving
/// edge receives fresh integer rates in `1..=10`.
///
/// Each settled epoch is captured with the network it was solved on so the
/// caller can check it against the oracle.
pub struct UpdateProtocol {
    rng: ChaCha8Rng,
    interval: usize,
    remaining: usize,
    next_agent: usize,
    next_at: usize,
    captured: Option<usize>,
    pub settled: Vec<SettledEpoch>,
    /// Updates that landed before the previous epoch converged.
    pub missed: usize,
}

impl UpdateProtocol {
    pub fn new(seed: u64, interval: usize, updates: usize) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            interval,
            remaining: updates,
            next_agent: 0,
            next_at: interval,
            captured: None,
            settled: Vec::new(),
            missed: 0,
        }
    }

    /// Largest update count a network can absorb while staying feasible.
    pub fn max_updates(problem: &Problem) -> usize {
        let topology = &problem.topology;
        topology.active_waypoint_count() - topology.active_agent_count()
    }
}

impl EventSource for UpdateProtocol {
    fn poll(&mut self, view: &LoopView<'_>) -> SourcePoll {
        if let Some(assignment) = view.settled {
            // The loop bumps the epoch counter as it settles.
            if self.captured != Some(view.state.epoch) {
                self.captured = Some(view.state.epoch);
                self.settled.push(SettledEpoch {
                    problem: view.state.problem.clone(),
                    assignment: assignment.clone(),
                    iteration: view.iteration,
                });
            }
        }
        if self.remaining == 0 {
            return SourcePoll::Finished;
        }
        if view.iteration < self.next_at {
            return SourcePoll::Idle;
        }
        if view.settled.is_none() {
            self.missed += 1;
        }
        self.remaining -= 1;
        self.next_at += self.interval;

        let topology = view.state.topology();
        let agents: Vec<usize> = topology.active_agents().collect();
        let agent = agents[self.next_agent % agents.len()];
        self.next_agent += 1;

        let mut events = Vec::new();
        let mut reached = None;
        if let Some(waypoint) = view.state.current_assignment().and_then(|a| a.get(agent)) {
            if topology.active_waypoint_count() > topology.active_agent_count() {
                reached = Some(waypoint);
                events.push(SwarmEvent::WaypointReached {
                    agent,
                    waypoint,
                    reading: 0,
                });
            }
        }
        let updates = topology
            .active_edges()
            .filter(|&(_, y)| Some(y) != reached)
            .map(|(x, y)| EdgeUpdate {
                agent: x,
                waypoint: y,
                gamma: Some(f64::from(self.rng.gen_range(1..=10u8))),
                delta: Some(f64::from(self.rng.gen_range(1..=10u8))),
            })
            .collect();
        events.push(SwarmEvent::ParamUpdate(updates));
        SourcePoll::Events(events)
    }
}

/// Both allocators flown on one scenario.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub seed: u64,
    pub greedy: MissionReport,
    pub ot: MissionReport,
}

impl Comparison {
    pub fn run(scenario: &Scenario, config: &SimConfig) -> Result<Self> {
        Ok(Self {
            seed: scenario.seed,
            greedy: run_mission(scenario, Allocator::Greedy, config)?,
            ot: run_mission(scenario, Allocator::DynamicOt, config)?,
        })
    }

    pub fn ot_wins(&self) -> bool {
        self.ot.total_distance <= self.greedy.total_distance
    }
}

/// Runs `count` random scenarios seeded `seed, seed + 1, ...`.
pub fn compare_random(
    count: usize,
    seed: u64,
    spec: &RandomScenario,
    config: &SimConfig,
) -> Result<Vec<Comparison>> {
    (0..count as u64)
        .map(|i| Comparison::run(&Scenario::random(seed.wrapping_add(i), spec), config))
        .collect()
}

/// Mean greedy distance, mean OT distance, and the fraction of OT wins.
pub fn summarize(rows: &[Comparison]) -> (f64, f64, f64) {
    if rows.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = rows.len() as f64;
    let greedy = rows.iter().map(|r| r.greedy.total_distance).sum::<f64>() / n;
    let ot = rows.iter().map(|r| r.ot.total_distance).sum::<f64>() / n;
    let wins = rows.iter().filter(|r| r.ot_wins()).count() as f64 / n;
    (greedy, ot, wins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::{dynamic_loop, DynamicConfig, DynamicState};
    use crate::fixtures;
    use crate::model::aggregate_utility;
    use crate::oracle::brute_force_optimal;

    #[test]
    fn random_problem_is_valid_and_reproducible() {
        let a = random_integer_problem(&mut ChaCha8Rng::seed_from_u64(1), 3, 5).unwrap();
        let b = random_integer_problem(&mut ChaCha8Rng::seed_from_u64(1), 3, 5).unwrap();
        assert_eq!(a.params, b.params);
        assert!(a
            .params
            .gamma
            .as_slice()
            .iter()
            .all(|&v| (1.0..=10.0).contains(&v)));
    }

    #[test]
    fn protocol_settles_every_epoch_on_the_case_study() {
        let problem = fixtures::case_study();
        let updates = UpdateProtocol::max_updates(&problem);
        assert_eq!(updates, 7);
        let mut protocol = UpdateProtocol::new(7, 250, updates);
        let mut state = DynamicState::new(problem, 10.0);
        let records = dynamic_loop(&mut state, &mut protocol, &DynamicConfig::default()).unwrap();
        assert_eq!(protocol.missed, 0);
        assert_eq!(records.len(), updates + 1);
        assert_eq!(protocol.settled.len(), updates + 1);
        assert_eq!(state.visited.len(), updates);
        for epoch in &protocol.settled {
            let (_, best) =
                brute_force_optimal(&epoch.problem.topology, &epoch.problem.params).unwrap();
            assert_eq!(
                aggregate_utility(&epoch.assignment, &epoch.problem.params),
                best
            );
        }
    }

    #[test]
    fn comparison_summary() {
        let spec = RandomScenario::default();
        let rows = compare_random(2, 3, &spec, &SimConfig::default()).unwrap();
        assert_eq!(rows[1].seed, 4);
        let (g, o, w) = summarize(&rows);
        assert!(g > 0.0 && o > 0.0 && (0.0..=1.0).contains(&w));
    }
}
