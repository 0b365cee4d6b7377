//! Event-driven re-optimisation on top of the ADMM solver.
//!
//! The solver never restarts. Events (a waypoint reached, an agent dropping
//! out, new utility rates) are applied atomically between iterations; the
//! surviving plan, ancillary plans and duals carry over as a warm start.
//! Each time the iterate converges the current assignment is extracted and
//! recorded as one epoch.

use std::collections::{BTreeSet, VecDeque};
use std::sync::mpsc::{Receiver, TryRecvError};

use crate::admm::{self, AdmmConfig, AdmmState, ConvergenceReport};
use crate::error::{Error, Result};
use crate::matching::min_cost_assignment;
use crate::model::{Assignment, BoundsMode, NetworkTopology, Problem, UtilityParams};

/// Plan entries at or below this value are treated as outside the support,
/// and waypoint columns summing to at least `1 - SUPPORT_TOL` as saturated.
pub const SUPPORT_TOL: f64 = 1e-4;

/// New rates for one edge; `None` leaves that side untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeUpdate {
    pub agent: usize,
    pub waypoint: usize,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SwarmEvent {
    /// `agent` arrived at its assigned `waypoint` and took a binary `reading`.
    WaypointReached {
        agent: usize,
        waypoint: usize,
        reading: i32,
    },
    /// `agent` left the swarm (landed, battery swap, fault).
    AgentDropout {
        agent: usize,
    },
    ParamUpdate(Vec<EdgeUpdate>),
}

/// Solver state carried across epochs.
#[derive(Debug, Clone)]
pub struct DynamicState {
    pub epoch: usize,
    pub admm: AdmmState,
    pub problem: Problem,
    pub visited: BTreeSet<usize>,
    pub assignment_log: Vec<(usize, Assignment)>,
}

impl DynamicState {
    /// Cold start from the uniform plan.
    pub fn new(problem: Problem, eta: f64) -> Self {
        let admm = AdmmState::new(&problem.topology, eta);
        Self {
            epoch: 0,
            admm,
            problem,
            visited: BTreeSet::new(),
            assignment_log: Vec::new(),
        }
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.problem.topology
    }

    pub fn params(&self) -> &UtilityParams {
        &self.problem.params
    }

    /// Latest recorded assignment, if any epoch has converged.
    pub fn current_assignment(&self) -> Option<&Assignment> {
        self.assignment_log.last().map(|(_, a)| a)
    }

    /// Applies `event`; waypoint readings leave the rates unchanged.
    pub fn apply_event(&mut self, event: SwarmEvent) -> Result<()> {
        self.apply_event_with(event, |_, _, _, _| {})
    }

    /// Applies `event`. On `WaypointReached`, `rule` is called after the
    /// waypoint is removed with `(params, topology, waypoint, reading)` and
    /// may rewrite rates on the surviving edges.
    pub fn apply_event_with<F>(&mut self, event: SwarmEvent, rule: F) -> Result<()>
    where
        F: FnOnce(&mut UtilityParams, &NetworkTopology, usize, i32),
    {
        match event {
            SwarmEvent::WaypointReached {
                agent,
                waypoint,
                reading,
            } => {
                if self.visited.contains(&waypoint) {
                    return Err(Error::RevisitAttempt(waypoint));
                }
                self.require_agent(agent)?;
                self.require_waypoint(waypoint)?;
                let assigned = self
                    .assignment_log
                    .iter()
                    .rev()
                    .find_map(|(_, a)| a.get(agent));
                if let Some(assigned) = assigned {
                    if assigned != waypoint {
                        return Err(Error::NotCurrentAssignment {
                            agent,
                            waypoint,
                            assigned,
                        });
                    }
                }
                self.problem.topology.remove_waypoint(waypoint);
                self.visited.insert(waypoint);
                rule(
                    &mut self.problem.params,
                    &self.problem.topology,
                    waypoint,
                    reading,
                );
                crate::model::validate_params(&self.problem.topology, &self.problem.params)?;
            }
            SwarmEvent::AgentDropout { agent } => {
                self.require_agent(agent)?;
                self.problem.topology.remove_agent(agent);
            }
            SwarmEvent::ParamUpdate(updates) => {
                for u in &updates {
                    if u.agent >= self.topology().agent_count()
                        || u.waypoint >= self.topology().waypoint_count()
                        || !self.topology().is_edge_active(u.agent, u.waypoint)
                    {
                        return Err(Error::UnknownEntity {
                            kind: "edge",
                            id: u.agent * self.topology().waypoint_count() + u.waypoint,
                        });
                    }
                    for value in u.gamma.into_iter().chain(u.delta) {
                        if !(value.is_finite() && value > 0.0) {
                            return Err(Error::NonPositiveCoefficient {
                                agent: u.agent,
                                waypoint: u.waypoint,
                            });
                        }
                    }
                }
                for u in updates {
                    if let Some(g) = u.gamma {
                        self.problem.params.gamma.set(u.agent, u.waypoint, g);
                    }
                    if let Some(d) = u.delta {
                        self.problem.params.delta.set(u.agent, u.waypoint, d);
                    }
                }
            }
        }
        self.admm.mask_to(&self.problem.topology);
        Ok(())
    }

    /// Errors if the current network admits no feasible plan.
    pub fn check_feasible(&self) -> Result<()> {
        let topology = self.topology();
        topology.check_feasible()?;
        if self.problem.bounds.mode == BoundsMode::Matching
            && topology.active_agent_count() > topology.active_waypoint_count()
        {
            return Err(Error::Infeasible(format!(
                "{} active agents but only {} active waypoints",
                topology.active_agent_count(),
                topology.active_waypoint_count()
            )));
        }
        Ok(())
    }

    fn require_agent(&self, agent: usize) -> Result<()> {
        if self.topology().is_agent_active(agent) {
            Ok(())
        } else {
            Err(Error::UnknownEntity {
                kind: "agent",
                id: agent,
            })
        }
    }

    fn require_waypoint(&self, waypoint: usize) -> Result<()> {
        if self.topology().is_waypoint_active(waypoint) {
            Ok(())
        } else {
            Err(Error::UnknownEntity {
                kind: "waypoint",
                id: waypoint,
            })
        }
    }
}

/// `true` iff `max |pi_d - pi_s|` and the last iterate drift are both below `epsilon`.
pub fn check_convergence(state: &AdmmState, epsilon: f64) -> bool {
    let residual = state
        .pi_d
        .as_slice()
        .iter()
        .zip(state.pi_s.as_slice())
        .map(|(d, s)| (d - s).abs())
        .fold(0.0, f64::max);
    residual < epsilon && state.drift < epsilon
}

/// Reads an injective assignment off a converged plan.
///
/// Each active agent proposes the waypoint with the largest plan weight
/// (lowest waypoint id on ties). When two agents propose the same waypoint
/// the one with the larger weight keeps it (lowest agent id on ties) and the
/// other re-proposes among the waypoints it has not lost, until the proposals
/// are distinct.
///
/// With tied optima the solver can settle on a fractional optimal plan whose
/// per-agent argmax mixes different optimal assignments. The proposal is
/// therefore accepted only if it stays on the plan's support and covers every
/// saturated waypoint; otherwise an assignment with those properties is found
/// by min-cost matching over the support. Any such assignment lies on the same
/// face of the transport polytope as the plan, so it is optimal whenever the
/// plan is.
pub fn extract_assignment(
    state: &AdmmState,
    topology: &NetworkTopology,
    epsilon: f64,
) -> Result<Assignment> {
    let residual = admm::primal_residual(state, topology);
    if residual.is_nan() || residual >= epsilon {
        return Err(Error::NotConverged { residual, epsilon });
    }
    let plan = &state.pi;
    let saturated: BTreeSet<usize> = topology
        .active_waypoints()
        .filter(|&y| {
            topology.agents_of(y).map(|x| plan.get(x, y)).sum::<f64>() >= 1.0 - SUPPORT_TOL
        })
        .collect();

    if let Some(proposal) = argmax_proposal(state, topology) {
        let on_support = proposal.iter().all(|(x, y)| plan.get(x, y) > SUPPORT_TOL);
        let covers = saturated
            .iter()
            .all(|&y| proposal.iter().any(|(_, py)| py == y));
        if on_support && covers {
            return Ok(proposal);
        }
    }
    face_vertex(state, topology, &saturated)
}

fn argmax_proposal(state: &AdmmState, topology: &NetworkTopology) -> Option<Assignment> {
    let plan = &state.pi;
    let agents: Vec<usize> = topology.active_agents().collect();
    let mut lost: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); agents.len()];
    loop {
        let mut choice = Vec::with_capacity(agents.len());
        for (i, &x) in agents.iter().enumerate() {
            let best = topology
                .waypoints_of(x)
                .filter(|y| !lost[i].contains(y))
                .fold(None, |best: Option<usize>, y| match best {
                    Some(b) if plan.get(x, b) >= plan.get(x, y) => Some(b),
                    _ => Some(y),
                })?;
            choice.push(best);
        }
        let mut conflict = false;
        for i in 0..agents.len() {
            for j in 0..agents.len() {
                if i == j || choice[i] != choice[j] {
                    continue;
                }
                let y = choice[i];
                let (wi, wj) = (plan.get(agents[i], y), plan.get(agents[j], y));
                // j loses to i when i has more weight, or equal weight and lower id.
                if wi > wj || (wi == wj && i < j) {
                    lost[j].insert(y);
                    conflict = true;
                }
            }
        }
        if !conflict {
            return Assignment::from_pairs(agents.iter().copied().zip(choice)).ok();
        }
    }
}

fn face_vertex(
    state: &AdmmState,
    topology: &NetworkTopology,
    saturated: &BTreeSet<usize>,
) -> Result<Assignment> {
    let agents: Vec<usize> = topology.active_agents().collect();
    let waypoints: Vec<usize> = topology.active_waypoints().collect();
    if agents.len() > waypoints.len() {
        return Err(Error::Infeasible(format!(
            "{} active agents but only {} active waypoints",
            agents.len(),
            waypoints.len()
        )));
    }
    // Lexicographic weights: cover every agent, then every saturated
    // waypoint, then prefer heavier plan entries.
    let per_saturated = agents.len() as f64 + 1.0;
    let per_agent = (saturated.len() as f64 + 1.0) * per_saturated;
    const FORBIDDEN: f64 = 1e12;
    let mut cost = Vec::with_capacity(agents.len() * waypoints.len());
    for &x in &agents {
        for &y in &waypoints {
            let weight = state.pi.get(x, y);
            if topology.is_edge_active(x, y) && weight > SUPPORT_TOL {
                let bonus = if saturated.contains(&y) {
                    per_saturated
                } else {
                    0.0
                };
                cost.push(-(per_agent + bonus + weight));
            } else {
                cost.push(FORBIDDEN);
            }
        }
    }
    let columns = min_cost_assignment(agents.len(), waypoints.len(), &cost);
    let mut pairs = Vec::with_capacity(agents.len());
    for (i, &c) in columns.iter().enumerate() {
        if cost[i * waypoints.len() + c] >= FORBIDDEN {
            return Err(Error::Infeasible(format!(
                "agent {} has no unclaimed waypoint on the plan's support",
                agents[i]
            )));
        }
        pairs.push((agents[i], waypoints[c]));
    }
    Assignment::from_pairs(pairs)
}

/// Budgets for [`dynamic_loop`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicConfig {
    /// `max_iterations` bounds each epoch's re-convergence.
    pub admm: AdmmConfig,
    /// Hard stop on the total number of iterations across the run.
    pub max_total_iterations: usize,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        Self {
            admm: AdmmConfig {
                max_iterations: 500,
                ..AdmmConfig::default()
            },
            max_total_iterations: 1_000_000,
        }
    }
}

/// One converged epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub assignment: Assignment,
    /// Iterations since the epoch began (the last event, or the start).
    pub report: ConvergenceReport,
    /// Solver iteration counter when convergence was declared.
    pub iteration: usize,
}

/// What the loop exposes to an event source before each iteration.
pub struct LoopView<'a> {
    /// Solver iterations performed so far.
    pub iteration: usize,
    pub state: &'a DynamicState,
    /// Set once the current epoch has converged, until the next event.
    pub settled: Option<&'a Assignment>,
}

pub enum SourcePoll {
    Events(Vec<SwarmEvent>),
    Idle,
    /// No further events will arrive; the loop stops once settled.
    Finished,
}

pub trait EventSource {
    fn poll(&mut self, view: &LoopView<'_>) -> SourcePoll;
}

impl<F> EventSource for F
where
    F: FnMut(&LoopView<'_>) -> SourcePoll,
{
    fn poll(&mut self, view: &LoopView<'_>) -> SourcePoll {
        self(view)
    }
}

/// Source that never emits.
pub struct NoEvents;

impl EventSource for NoEvents {
    fn poll(&mut self, _: &LoopView<'_>) -> SourcePoll {
        SourcePoll::Finished
    }
}

/// Events released once the solver reaches a given iteration count.
#[derive(Debug, Default)]
pub struct ScheduledEvents {
    queue: VecDeque<(usize, SwarmEvent)>,
}

impl ScheduledEvents {
    /// `schedule` must be sorted by iteration.
    pub fn new(schedule: impl IntoIterator<Item = (usize, SwarmEvent)>) -> Self {
        Self {
            queue: schedule.into_iter().collect(),
        }
    }
}

impl EventSource for ScheduledEvents {
    fn poll(&mut self, view: &LoopView<'_>) -> SourcePoll {
        let mut due = Vec::new();
        while let Some((at, _)) = self.queue.front() {
            if *at > view.iteration {
                break;
            }
            due.push(self.queue.pop_front().expect("front exists").1);
        }
        match (due.is_empty(), self.queue.is_empty()) {
            (false, _) => SourcePoll::Events(due),
            (true, true) => SourcePoll::Finished,
            (true, false) => SourcePoll::Idle,
        }
    }
}

/// Events fed from another thread through a channel. Finished once every
/// sender is dropped and the queue is drained.
pub struct QueueSource {
    rx: Receiver<SwarmEvent>,
}

impl QueueSource {
    pub fn new(rx: Receiver<SwarmEvent>) -> Self {
        Self { rx }
    }
}

impl EventSource for QueueSource {
    fn poll(&mut self, _: &LoopView<'_>) -> SourcePoll {
        let mut events = Vec::new();
        loop {
            match self.rx.try_recv() {
                Ok(event) => events.push(event),
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) if events.is_empty() => {
                    return SourcePoll::Finished
                }
                Err(TryRecvError::Disconnected) => break,
            }
        }
        if events.is_empty() {
            SourcePoll::Idle
        } else {
            SourcePoll::Events(events)
        }
    }
}

/// Interleaves solver iterations with events until the source is finished
/// and the current epoch has converged, or the network runs out of agents or
/// waypoints.
///
/// Returns one record per converged epoch. The state is left as it was at
/// exit, so a caller can inspect or resume it.
pub fn dynamic_loop(
    state: &mut DynamicState,
    source: &mut impl EventSource,
    config: &DynamicConfig,
) -> Result<Vec<EpochRecord>> {
    config.admm.validate()?;
    let epsilon = config.admm.epsilon;
    let mut records: Vec<EpochRecord> = Vec::new();
    let mut report = ConvergenceReport::default();
    let mut settled = false;
    let mut total = 0usize;

    loop {
        let poll = {
            let view = LoopView {
                iteration: state.admm.iteration,
                state,
                settled: if settled {
                    records.last().map(|r| &r.assignment)
                } else {
                    None
                },
            };
            source.poll(&view)
        };
        let finished = match poll {
            SourcePoll::Events(events) => {
                for event in events {
                    state.apply_event(event)?;
                }
                settled = false;
                report = ConvergenceReport::default();
                false
            }
            SourcePoll::Idle => false,
            SourcePoll::Finished => true,
        };

        let topology = state.topology();
        if topology.active_agent_count() == 0 || topology.active_waypoint_count() == 0 {
            break;
        }
        if settled && finished {
            break;
        }
        if total >= config.max_total_iterations {
            break;
        }
        state.check_feasible()?;

        let stats = admm::iterate(&mut state.admm, &state.problem);
        total += 1;
        if settled {
            continue;
        }
        report.iterations += 1;
        report.primal_residual = stats.primal_residual;
        report.drift = stats.drift;
        report.utility_trace.push(stats.utility);
        report.residual_trace.push(stats.primal_residual);

        if stats.primal_residual < epsilon && stats.drift < epsilon {
            report.converged = true;
            let assignment = extract_assignment(&state.admm, state.topology(), epsilon)?;
            state.assignment_log.push((state.epoch, assignment.clone()));
            records.push(EpochRecord {
                epoch: state.epoch,
                assignment,
                report: std::mem::take(&mut report),
                iteration: state.admm.iteration,
            });
            state.epoch += 1;
            settled = true;
        } else if report.iterations >= config.admm.max_iterations {
            return Err(Error::EpochBudgetExceeded {
                epoch: state.epoch,
                budget: config.admm.max_iterations,
            });
        }
    }
    Ok(records)
}
