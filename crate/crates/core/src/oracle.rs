//! Exhaustive-enumeration optimum for matching-mode problems.

use crate::error::{Error, Result};
use crate::model::{Assignment, NetworkTopology, UtilityParams};

/// Largest active-agent count accepted by [`brute_force_optimal`].
pub const ENUMERATION_LIMIT: usize = 8;

/// Enumerates every injective agent-to-waypoint map over active edges and
/// returns one maximising the summed `gamma + delta`, together with its value.
///
/// Among equal-valued maps the lexicographically smallest one (by agent id,
/// then waypoint id) is returned.
pub fn brute_force_optimal(
    topology: &NetworkTopology,
    params: &UtilityParams,
) -> Result<(Assignment, f64)> {
    let agents: Vec<usize> = topology.active_agents().collect();
    if agents.len() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            agents: agents.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    if agents.len() > topology.active_waypoint_count() {
        return Err(Error::Infeasible(format!(
            "{} active agents but only {} active waypoints",
            agents.len(),
            topology.active_waypoint_count()
        )));
    }

    let mut search = Search {
        topology,
        params,
        agents: &agents,
        taken: vec![false; topology.waypoint_count()],
        current: Vec::with_capacity(agents.len()),
        best: None,
    };
    search.descend(0, 0.0);

    let (choice, value) = search.best.ok_or_else(|| {
        Error::Infeasible("no injective assignment covers every active agent".into())
    })?;
    let assignment = Assignment::from_pairs(agents.iter().copied().zip(choice))?;
    Ok((assignment, value))
}

struct Search<'a> {
    topology: &'a NetworkTopology,
    params: &'a UtilityParams,
    agents: &'a [usize],
    taken: Vec<bool>,
    current: Vec<usize>,
    best: Option<(Vec<usize>, f64)>,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, value: f64) {
        if depth == self.agents.len() {
            // Strict comparison keeps the first (lexicographically smallest) maximiser.
            if self.best.as_ref().is_none_or(|(_, best)| value > *best) {
                self.best = Some((self.current.clone(), value));
            }
            return;
        }
        let agent = self.agents[depth];
        for waypoint in 0..self.topology.waypoint_count() {
            if self.taken[waypoint] || !self.topology.is_edge_active(agent, waypoint) {
                continue;
            }
            self.taken[waypoint] = true;
            self.current.push(waypoint);
            self.descend(depth + 1, value + self.params.combined(agent, waypoint));
            self.current.pop();
            self.taken[waypoint] = false;
        }
    }
}
