//! Consensus ADMM for the agent/waypoint transport problem.
//!
//! Each iteration runs four steps:
//!
//! 1. every agent `x` solves for its row of the agent-side plan `pi_d`,
//! 2. every waypoint `y` solves for its column of the waypoint-side plan `pi_s`,
//! 3. the shared plan becomes the midpoint `pi = (pi_d + pi_s) / 2`,
//! 4. the dual moves by `alpha += eta / 2 * (pi_d - pi_s)`.
//!
//! With linear utilities the agent subproblem
//! `min -gamma.v + alpha.v + eta/2 |v - pi(k)|^2` over the row's feasible set
//! is a Euclidean projection of `pi(k) + (gamma - alpha) / eta`, and the
//! waypoint subproblem likewise projects `pi(k) + (delta + alpha) / eta`.
//! Steps 1 and 2 read only `pi(k)` and `alpha(k)`, so the per-node solves are
//! independent of each other and of evaluation order.

use crate::error::{Error, Result};
use crate::model::{Matrix, NetworkTopology, Problem};
use crate::projection::project_capped_simplex;

/// Step size, stopping tolerance and iteration budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig {
    pub eta: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            eta: 10.0,
            epsilon: 1e-6,
            max_iterations: 10_000,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "eta must be > 0, got {}",
                self.eta
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be > 0".into()));
        }
        Ok(())
    }
}

/// Solver iterate. All matrices are zero off the active-edge support.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub pi: Matrix,
    pub pi_d: Matrix,
    pub pi_s: Matrix,
    pub alpha: Matrix,
    pub iteration: usize,
    pub eta: f64,
    /// `max |pi(k+1) - pi(k)|` of the last iteration; infinite before the
    /// first iteration and after any change to the network.
    pub drift: f64,
}

impl AdmmState {
    /// Uniform plan `1 / |Y_x|` on each agent's edges, `pi_d = pi_s = pi`, zero duals.
    pub fn new(topology: &NetworkTopology, eta: f64) -> Self {
        let (n, m) = (topology.agent_count(), topology.waypoint_count());
        let mut pi = Matrix::zeros(n, m);
        for x in topology.active_agents() {
            let degree = topology.waypoints_of(x).count();
            for y in topology.waypoints_of(x) {
                pi.set(x, y, 1.0 / degree as f64);
            }
        }
        Self {
            pi_d: pi.clone(),
            pi_s: pi.clone(),
            pi,
            alpha: Matrix::zeros(n, m),
            iteration: 0,
            eta,
            drift: f64::INFINITY,
        }
    }

    /// Zeroes every variable on edges that are no longer active.
    pub fn mask_to(&mut self, topology: &NetworkTopology) {
        for x in 0..topology.agent_count() {
            for y in 0..topology.waypoint_count() {
                if !topology.is_edge_active(x, y) {
                    for m in [
                        &mut self.pi,
                        &mut self.pi_d,
                        &mut self.pi_s,
                        &mut self.alpha,
                    ] {
                        m.set(x, y, 0.0);
                    }
                }
            }
        }
        self.drift = f64::INFINITY;
    }
}

/// Final-iteration diagnostics plus per-iteration traces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub iterations: usize,
    /// `max |pi_d - pi_s|` over active edges.
    pub primal_residual: f64,
    /// `max |pi(k+1) - pi(k)|` over active edges.
    pub drift: f64,
    /// Aggregate utility `sum (gamma + delta) * pi_d` after each iteration.
    pub utility_trace: Vec<f64>,
    pub residual_trace: Vec<f64>,
    pub converged: bool,
}

impl ConvergenceReport {
    fn record(&mut self, stats: IterationStats) {
        self.iterations += 1;
        self.primal_residual = stats.primal_residual;
        self.drift = stats.drift;
        self.utility_trace.push(stats.utility);
        self.residual_trace.push(stats.primal_residual);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub primal_residual: f64,
    pub drift: f64,
    pub utility: f64,
}

/// New row of `pi_d` for `agent` (dense, zero off the agent's edges).
pub fn uav_subproblem(state: &AdmmState, agent: usize, problem: &Problem) -> Vec<f64> {
    let topology = &problem.topology;
    let edges: Vec<usize> = topology.waypoints_of(agent).collect();
    let w: Vec<f64> = edges
        .iter()
        .map(|&y| {
            state.pi.get(agent, y)
                + (problem.params.gamma.get(agent, y) - state.alpha.get(agent, y)) / state.eta
        })
        .collect();
    let (lower, upper) = problem.bounds.agent(agent);
    let v = project_capped_simplex(&w, lower, upper);
    let mut row = vec![0.0; topology.waypoint_count()];
    for (&y, value) in edges.iter().zip(v) {
        row[y] = value;
    }
    row
}

/// New column of `pi_s` for `waypoint` (dense, zero off the waypoint's edges).
pub fn waypoint_subproblem(state: &AdmmState, waypoint: usize, problem: &Problem) -> Vec<f64> {
    let topology = &problem.topology;
    let edges: Vec<usize> = topology.agents_of(waypoint).collect();
    let w: Vec<f64> = edges
        .iter()
        .map(|&x| {
            state.pi.get(x, waypoint)
                + (problem.params.delta.get(x, waypoint) + state.alpha.get(x, waypoint)) / state.eta
        })
        .collect();
    let (lower, upper) = problem.bounds.waypoint(waypoint);
    let v = project_capped_simplex(&w, lower, upper);
    let mut column = vec![0.0; topology.agent_count()];
    for (&x, value) in edges.iter().zip(v) {
        column[x] = value;
    }
    column
}

/// Sets `pi` to the midpoint of `pi_d` and `pi_s`; returns the drift
/// `max |pi(k+1) - pi(k)|`.
pub fn consensus_update(state: &mut AdmmState, topology: &NetworkTopology) -> f64 {
    let mut drift: f64 = 0.0;
    for (x, y) in topology.active_edges() {
        let next = 0.5 * (state.pi_d.get(x, y) + state.pi_s.get(x, y));
        drift = drift.max((next - state.pi.get(x, y)).abs());
        state.pi.set(x, y, next);
    }
    drift
}

/// Dual ascent `alpha += eta / 2 * (pi_d - pi_s)` on every active edge.
pub fn dual_update(state: &mut AdmmState, topology: &NetworkTopology) {
    let half_eta = 0.5 * state.eta;
    for (x, y) in topology.active_edges() {
        let next = state.alpha.get(x, y) + half_eta * (state.pi_d.get(x, y) - state.pi_s.get(x, y));
        state.alpha.set(x, y, next);
    }
}

/// `max |pi_d - pi_s|` over active edges.
pub fn primal_residual(state: &AdmmState, topology: &NetworkTopology) -> f64 {
    topology
        .active_edges()
        .map(|(x, y)| (state.pi_d.get(x, y) - state.pi_s.get(x, y)).abs())
        .fold(0.0, f64::max)
}

/// `sum (gamma + delta) * plan` over active edges.
pub fn plan_utility(plan: &Matrix, problem: &Problem) -> f64 {
    problem
        .topology
        .active_edges()
        .map(|(x, y)| problem.params.combined(x, y) * plan.get(x, y))
        .sum()
}

/// One synchronous round of all four steps.
pub fn iterate(state: &mut AdmmState, problem: &Problem) -> IterationStats {
    let topology = &problem.topology;
    let rows: Vec<(usize, Vec<f64>)> = topology
        .active_agents()
        .map(|x| (x, uav_subproblem(state, x, problem)))
        .collect();
    let columns: Vec<(usize, Vec<f64>)> = topology
        .active_waypoints()
        .map(|y| (y, waypoint_subproblem(state, y, problem)))
        .collect();

    for (x, row) in rows {
        for (y, value) in row.into_iter().enumerate() {
            state.pi_d.set(x, y, value);
        }
    }
    for (y, column) in columns {
        for (x, value) in column.into_iter().enumerate() {
            state.pi_s.set(x, y, value);
        }
    }

    let drift = consensus_update(state, topology);
    dual_update(state, topology);
    state.iteration += 1;
    state.drift = drift;

    IterationStats {
        primal_residual: primal_residual(state, topology),
        drift,
        utility: plan_utility(&state.pi_d, problem),
    }
}

/// `true` iff both primal residual and last drift are strictly below `epsilon`.
pub fn is_converged(state: &AdmmState, topology: &NetworkTopology, epsilon: f64) -> bool {
    primal_residual(state, topology) < epsilon && state.drift < epsilon
}

/// Runs from the uniform initial plan until converged or out of budget.
pub fn run_until_converged(
    problem: &Problem,
    config: &AdmmConfig,
) -> Result<(AdmmState, ConvergenceReport)> {
    config.validate()?;
    let state = AdmmState::new(&problem.topology, config.eta);
    run_from(state, problem, config)
}

/// Continues iterating from an existing (possibly warm) state.
pub fn run_from(
    mut state: AdmmState,
    problem: &Problem,
    config: &AdmmConfig,
) -> Result<(AdmmState, ConvergenceReport)> {
    config.validate()?;
    let mut report = ConvergenceReport::default();
    while report.iterations < config.max_iterations {
        let stats = iterate(&mut state, problem);
        report.record(stats);
        if stats.primal_residual < config.epsilon && stats.drift < config.epsilon {
            report.converged = true;
            return Ok((state, report));
        }
    }
    Err(Error::MaxIterationsExceeded(Box::new((state, report))))
}
