//! Pre-mission greedy baseline.
//!
//! Agents come online in id order. Each builds a nearest-neighbour chain of
//! its quota from its start over waypoints nobody has claimed yet, claiming
//! as it goes and ignoring every other agent.

use crate::sim::scenario::Scenario;

/// Ordered waypoint list per agent. With `W` waypoints and `A` agents each
/// agent's quota is `W / A`, the first `W % A` agents taking one extra.
pub fn greedy_allocate(scenario: &Scenario) -> Vec<Vec<usize>> {
    let agents = scenario.agent_starts.len();
    let total = scenario.waypoints.len();
    let mut claimed = vec![false; total];
    let mut plan = Vec::with_capacity(agents);
    for (agent, &start) in scenario.agent_starts.iter().enumerate() {
        let quota = total / agents + usize::from(agent < total % agents);
        let mut position = start;
        let mut chain = Vec::with_capacity(quota);
        for _ in 0..quota {
            // Strict `<` keeps the lowest id among equidistant waypoints.
            let mut nearest: Option<(usize, f64)> = None;
            for (y, &wp) in scenario.waypoints.iter().enumerate() {
                if claimed[y] {
                    continue;
                }
                let d = position.distance(wp);
                if nearest.is_none_or(|(_, best)| d < best) {
                    nearest = Some((y, d));
                }
            }
            let Some((y, _)) = nearest else { break };
            claimed[y] = true;
            chain.push(y);
            position = scenario.waypoints[y];
        }
        plan.push(chain);
    }
    plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::Point;

    fn scenario(agents: &[(f64, f64)], waypoints: &[(f64, f64)]) -> Scenario {
        Scenario {
            agent_starts: agents.iter().map(|&(x, y)| Point(x, y)).collect(),
            waypoints: waypoints.iter().map(|&(x, y)| Point(x, y)).collect(),
            chemical: Default::default(),
            agent_speed: 1.0,
            seed: 0,
        }
    }

    #[test]
    fn single_agent_chain() {
        let s = scenario(&[(0.0, 0.0)], &[(3.0, 0.0), (1.0, 0.0)]);
        assert_eq!(greedy_allocate(&s), vec![vec![1, 0]]);
    }

    #[test]
    fn two_agents_split_line() {
        let s = scenario(
            &[(0.0, 0.0), (10.0, 0.0)],
            &[(1.0, 0.0), (2.0, 0.0), (8.0, 0.0), (9.0, 0.0)],
        );
        assert_eq!(greedy_allocate(&s), vec![vec![0, 1], vec![3, 2]]);
    }

    #[test]
    fn first_agent_claims_regardless_of_others() {
        let s = scenario(&[(0.0, 0.0), (4.0, 0.0)], &[(3.0, 0.0), (5.0, 0.0)]);
        assert_eq!(greedy_allocate(&s), vec![vec![0], vec![1]]);
    }

    #[test]
    fn remainder_goes_to_lowest_ids_and_ties_to_lowest_waypoint() {
        let s = scenario(
            &[(0.0, 0.0), (0.0, 0.0)],
            &[(1.0, 0.0), (-1.0, 0.0), (0.0, 5.0)],
        );
        let plan = greedy_allocate(&s);
        assert_eq!(plan[0].len(), 2);
        assert_eq!(plan[1].len(), 1);
        assert_eq!(plan[0][0], 0);
    }
}
