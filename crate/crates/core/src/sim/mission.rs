//! Point-mass mission simulation for both allocators.

use std::collections::{BTreeMap, VecDeque};

use crate::admm::AdmmConfig;
use crate::dynamic::{dynamic_loop, DynamicConfig, DynamicState, EdgeUpdate, NoEvents, SwarmEvent};
use crate::error::{Error, Result};
use crate::model::{Bounds, Matrix, NetworkTopology, Problem, UtilityParams};
use crate::sim::greedy::greedy_allocate;
use crate::sim::message::{decode_message, encode_message, WaypointMessage};
use crate::sim::scenario::{Point, Scenario};
use crate::sim::utility::{distance_to_utility, importance_update};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Allocator {
    Greedy,
    DynamicOt,
}

impl Allocator {
    pub fn name(self) -> &'static str {
        match self {
            Allocator::Greedy => "greedy",
            Allocator::DynamicOt => "ot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Solver settings; `max_iterations` bounds each re-convergence.
    pub admm: AdmmConfig,
    /// Waypoint-side rate before anything is known about a waypoint.
    pub initial_delta: f64,
    /// Waypoints closer than this to a positive reading get boosted.
    pub importance_radius: f64,
    pub boost: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            // Agents launched together fly near-parallel paths, which yields
            // near-tied matchings that ADMM resolves slowly.
            admm: AdmmConfig {
                max_iterations: 200_000,
                ..AdmmConfig::default()
            },
            initial_delta: 1.0,
            importance_radius: 50.0,
            boost: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub agent: usize,
    pub waypoint: usize,
    /// Seconds since launch.
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionReport {
    pub allocator: Allocator,
    pub per_agent_distance: Vec<f64>,
    pub total_distance: f64,
    pub visit_order: Vec<Visit>,
    pub readings: BTreeMap<usize, u8>,
    /// Converged solver epochs (zero for the greedy baseline).
    pub epochs: usize,
    /// Waypoint reports sent over the message bus.
    pub messages: usize,
}

impl MissionReport {
    fn new(allocator: Allocator, agents: usize) -> Self {
        Self {
            allocator,
            per_agent_distance: vec![0.0; agents],
            total_distance: 0.0,
            visit_order: Vec::new(),
            readings: BTreeMap::new(),
            epochs: 0,
            messages: 0,
        }
    }

    fn finish(mut self) -> Self {
        self.total_distance = self.per_agent_distance.iter().sum();
        self
    }
}

/// Flies the scenario to completion with the chosen allocator.
pub fn run_mission(
    scenario: &Scenario,
    allocator: Allocator,
    config: &SimConfig,
) -> Result<MissionReport> {
    scenario.validate()?;
    match allocator {
        Allocator::Greedy => Ok(run_greedy(scenario)),
        Allocator::DynamicOt => run_dynamic_ot(scenario, config),
    }
}

fn reading_of(scenario: &Scenario, waypoint: usize) -> u8 {
    u8::from(scenario.chemical.contains(&waypoint))
}

fn run_greedy(scenario: &Scenario) -> MissionReport {
    let plan = greedy_allocate(scenario);
    let mut report = MissionReport::new(Allocator::Greedy, scenario.agent_starts.len());
    for (agent, route) in plan.iter().enumerate() {
        let mut position = scenario.agent_starts[agent];
        let mut travelled = 0.0;
        for &waypoint in route {
            let target = scenario.waypoints[waypoint];
            travelled += position.distance(target);
            position = target;
            report.visit_order.push(Visit {
                agent,
                waypoint,
                time: travelled / scenario.agent_speed,
            });
            report
                .readings
                .insert(waypoint, reading_of(scenario, waypoint));
        }
        report.per_agent_distance[agent] = travelled;
    }
    report
        .visit_order
        .sort_by(|a, b| a.time.total_cmp(&b.time).then(a.agent.cmp(&b.agent)));
    report.finish()
}

fn run_dynamic_ot(scenario: &Scenario, config: &SimConfig) -> Result<MissionReport> {
    let agents = scenario.agent_starts.len();
    let waypoints = scenario.waypoints.len();
    if agents > waypoints {
        return Err(Error::InvalidScenario(format!(
            "{agents} agents but only {waypoints} waypoints"
        )));
    }
    let diagonal = scenario.map_diagonal();
    let mut positions = scenario.agent_starts.clone();

    let gamma = distance_matrix(&positions, &scenario.waypoints, diagonal);
    let delta = Matrix::filled(agents, waypoints, config.initial_delta);
    let problem = Problem::new(
        NetworkTopology::full(agents, waypoints)?,
        UtilityParams::new(gamma, delta),
        Bounds::matching(agents, waypoints),
    )?;
    let mut solver = DynamicState::new(problem, config.admm.eta);
    let loop_config = DynamicConfig {
        admm: config.admm,
        max_total_iterations: usize::MAX,
    };

    // Cold start: agent i heads to waypoint i.
    let mut targets: Vec<Option<usize>> = (0..agents).map(Some).collect();
    let mut report = MissionReport::new(Allocator::DynamicOt, agents);
    let mut bus: VecDeque<[u8; 12]> = VecDeque::new();
    let mut clock = 0.0;

    while report.visit_order.len() < waypoints {
        let (arriving, dt) = targets
            .iter()
            .enumerate()
            .filter_map(|(x, t)| t.map(|y| (x, positions[x].distance(scenario.waypoints[y]))))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(x, d)| (x, d / scenario.agent_speed))
            .ok_or(Error::Stalled { agent: 0 })?;

        for x in 0..agents {
            let Some(y) = targets[x] else { continue };
            let target = scenario.waypoints[y];
            let next = if x == arriving {
                target
            } else {
                positions[x].step_toward(target, dt * scenario.agent_speed)
            };
            report.per_agent_distance[x] += positions[x].distance(next);
            positions[x] = next;
        }
        clock += dt;

        let waypoint = targets[arriving]
            .take()
            .expect("arriving agent has a target");
        let reading = reading_of(scenario, waypoint);
        report.visit_order.push(Visit {
            agent: arriving,
            waypoint,
            time: clock,
        });
        report.readings.insert(waypoint, reading);
        bus.push_back(encode_message(&WaypointMessage::new(
            arriving as i32,
            waypoint as i32,
            i32::from(reading),
        )?));
        report.messages += 1;

        while let Some(bytes) = bus.pop_front() {
            let msg = decode_message(&bytes)?;
            solver.apply_event_with(
                SwarmEvent::WaypointReached {
                    agent: msg.agent_id as usize,
                    waypoint: msg.waypoint_id as usize,
                    reading: msg.reading,
                },
                |params, topology, reached, reading| {
                    importance_update(
                        params,
                        topology,
                        reached,
                        reading,
                        &scenario.waypoints,
                        config.importance_radius,
                        config.boost,
                    )
                },
            )?;
        }
        if report.visit_order.len() == waypoints {
            break;
        }

        // Everyone else already holds a distinct unvisited target, so if
        // waypoints now run short the arriving agent is the one to land.
        let topology = solver.topology();
        if topology.active_agent_count() > topology.active_waypoint_count() {
            solver.apply_event(SwarmEvent::AgentDropout { agent: arriving })?;
        }

        let updates: Vec<EdgeUpdate> = solver
            .topology()
            .active_edges()
            .map(|(x, y)| EdgeUpdate {
                agent: x,
                waypoint: y,
                gamma: Some(distance_to_utility(
                    positions[x].distance(scenario.waypoints[y]),
                    diagonal,
                )),
                delta: None,
            })
            .collect();
        solver.apply_event(SwarmEvent::ParamUpdate(updates))?;

        let records = dynamic_loop(&mut solver, &mut NoEvents, &loop_config)?;
        let epoch = records.last().ok_or(Error::Stalled { agent: arriving })?;
        report.epochs += 1;
        for x in solver.topology().active_agents() {
            targets[x] = Some(epoch.assignment.get(x).ok_or(Error::Stalled { agent: x })?);
        }
    }
    Ok(report.finish())
}

fn distance_matrix(agents: &[Point], waypoints: &[Point], diagonal: f64) -> Matrix {
    let data = agents
        .iter()
        .flat_map(|a| {
            waypoints
                .iter()
                .map(move |w| distance_to_utility(a.distance(*w), diagonal))
        })
        .collect();
    Matrix::from_row_major(agents.len(), waypoints.len(), data).expect("shape matches")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;
    use crate::sim::scenario::RandomScenario;

    fn line_scenario() -> Scenario {
        Scenario {
            agent_starts: vec![Point(0.0, 0.0)],
            waypoints: vec![Point(10.0, 0.0), Point(20.0, 0.0)],
            chemical: Default::default(),
            agent_speed: 2.0,
            seed: 0,
        }
    }

    fn assert_each_waypoint_once(report: &MissionReport, waypoints: usize) {
        let mut seen: Vec<usize> = report.visit_order.iter().map(|v| v.waypoint).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..waypoints).collect::<Vec<_>>());
    }

    #[test]
    fn collinear_single_agent() {
        for allocator in [Allocator::Greedy, Allocator::DynamicOt] {
            let report = run_mission(&line_scenario(), allocator, &SimConfig::default()).unwrap();
            assert!((report.total_distance - 20.0).abs() < 1e-9, "{allocator:?}");
            let order: Vec<usize> = report.visit_order.iter().map(|v| v.waypoint).collect();
            assert_eq!(order, vec![0, 1]);
            assert!((report.visit_order[1].time - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_scenario_visits_everything_once() {
        let scenario = Scenario::random(3, &RandomScenario::default());
        for allocator in [Allocator::Greedy, Allocator::DynamicOt] {
            let report = run_mission(&scenario, allocator, &SimConfig::default()).unwrap();
            assert_each_waypoint_once(&report, 12);
            let sum: f64 = report.per_agent_distance.iter().sum();
            assert_eq!(report.total_distance, sum);
            assert_eq!(report.readings.values().filter(|&&r| r == 1).count(), 3);
        }
    }

    #[test]
    fn greedy_is_deterministic() {
        let scenario = Scenario::random(11, &RandomScenario::default());
        let a = run_mission(&scenario, Allocator::Greedy, &SimConfig::default()).unwrap();
        let b = run_mission(&scenario, Allocator::Greedy, &SimConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn distance_rates_always_validate() {
        let scenario = Scenario::random(5, &RandomScenario::default());
        let gamma = distance_matrix(
            &scenario.agent_starts,
            &scenario.waypoints,
            scenario.map_diagonal(),
        );
        let params = UtilityParams::new(gamma, Matrix::filled(3, 12, 1.0));
        validate_params(&NetworkTopology::full(3, 12).unwrap(), &params).unwrap();
    }

    #[test]
    fn more_agents_than_waypoints_is_rejected_for_ot() {
        let mut scenario = line_scenario();
        scenario.agent_starts = vec![Point(0.0, 0.0); 3];
        assert!(run_mission(&scenario, Allocator::DynamicOt, &SimConfig::default()).is_err());
        assert!(run_mission(&scenario, Allocator::Greedy, &SimConfig::default()).is_ok());
    }
}
