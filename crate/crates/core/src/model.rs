//! Domain types for the agent/waypoint transport network.
//!
//! Agents index rows and waypoints index columns of every matrix. All
//! matrices are stored dense over `agent_count x waypoint_count`; inactive
//! edges are masked by the [`NetworkTopology`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds a matrix from a row-major buffer.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected_rows: rows,
                expected_cols: cols,
                found_rows: data.len() / cols.max(1),
                found_cols: cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Ragged input is rejected.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected_rows: rows.len(),
                    expected_cols: cols,
                    found_rows: rows.len(),
                    found_cols: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Elementwise map into a new matrix.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rows != rows || self.cols != cols {
            return Err(Error::DimensionMismatch {
                expected_rows: rows,
                expected_cols: cols,
                found_rows: self.rows,
                found_cols: self.cols,
            });
        }
        Ok(())
    }
}

/// Bipartite agent/waypoint network with an active-edge mask.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    agent_count: usize,
    waypoint_count: usize,
    edges: Vec<bool>,
    agents: Vec<bool>,
    waypoints: Vec<bool>,
}

impl NetworkTopology {
    /// Fully connected network: every agent is linked to every waypoint.
    pub fn full(agent_count: usize, waypoint_count: usize) -> Result<Self> {
        Self::with_edges(
            agent_count,
            waypoint_count,
            (0..agent_count).flat_map(|x| (0..waypoint_count).map(move |y| (x, y))),
        )
    }

    /// Network over all agents and waypoints with the given edges.
    ///
    /// Duplicate or out-of-range edges are rejected.
    pub fn with_edges(
        agent_count: usize,
        waypoint_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if agent_count == 0 || waypoint_count == 0 {
            return Err(Error::InvalidTopology(
                "agent and waypoint counts must be positive".into(),
            ));
        }
        let mut mask = vec![false; agent_count * waypoint_count];
        for (x, y) in edges {
            if x >= agent_count || y >= waypoint_count {
                return Err(Error::InvalidTopology(format!(
                    "edge ({x}, {y}) out of range"
                )));
            }
            let slot = &mut mask[x * waypoint_count + y];
            if *slot {
                return Err(Error::InvalidTopology(format!("duplicate edge ({x}, {y})")));
            }
            *slot = true;
        }
        Ok(Self {
            agent_count,
            waypoint_count,
            edges: mask,
            agents: vec![true; agent_count],
            waypoints: vec![true; waypoint_count],
        })
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn waypoint_count(&self) -> usize {
        self.waypoint_count
    }

    #[inline]
    pub fn is_edge_active(&self, agent: usize, waypoint: usize) -> bool {
        self.edges[agent * self.waypoint_count + waypoint]
    }

    pub fn is_agent_active(&self, agent: usize) -> bool {
        self.agents.get(agent).copied().unwrap_or(false)
    }

    pub fn is_waypoint_active(&self, waypoint: usize) -> bool {
        self.waypoints.get(waypoint).copied().unwrap_or(false)
    }

    pub fn active_agents(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.agent_count).filter(|&x| self.agents[x])
    }

    pub fn active_waypoints(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.waypoint_count).filter(|&y| self.waypoints[y])
    }

    pub fn active_agent_count(&self) -> usize {
        self.agents.iter().filter(|&&a| a).count()
    }

    pub fn active_waypoint_count(&self) -> usize {
        self.waypoints.iter().filter(|&&w| w).count()
    }

    /// Waypoints linked to `agent` (the agent's neighbourhood).
    pub fn waypoints_of(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.waypoint_count).filter(move |&y| self.is_edge_active(agent, y))
    }

    /// Agents linked to `waypoint`.
    pub fn agents_of(&self, waypoint: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.agent_count).filter(move |&x| self.is_edge_active(x, waypoint))
    }

    pub fn active_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.agent_count).flat_map(move |x| self.waypoints_of(x).map(move |y| (x, y)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// Deactivates a waypoint along with all its edges.
    pub fn remove_waypoint(&mut self, waypoint: usize) {
        self.waypoints[waypoint] = false;
        for x in 0..self.agent_count {
            self.edges[x * self.waypoint_count + waypoint] = false;
        }
    }

    /// Deactivates an agent along with all its edges.
    pub fn remove_agent(&mut self, agent: usize) {
        self.agents[agent] = false;
        let start = agent * self.waypoint_count;
        self.edges[start..start + self.waypoint_count].fill(false);
    }

    /// Checks that every active agent still has at least one active edge.
    pub fn check_feasible(&self) -> Result<()> {
        for x in self.active_agents() {
            if self.waypoints_of(x).next().is_none() {
                return Err(Error::Infeasible(format!("agent {x} has no active edge")));
            }
        }
        Ok(())
    }
}

/// Linear utility rates on every edge: `gamma` on the agent side, `delta` on
/// the waypoint side.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityParams {
    pub gamma: Matrix,
    pub delta: Matrix,
}

impl UtilityParams {
    pub fn new(gamma: Matrix, delta: Matrix) -> Self {
        Self { gamma, delta }
    }

    /// `gamma + delta` on one edge.
    #[inline]
    pub fn combined(&self, agent: usize, waypoint: usize) -> f64 {
        self.gamma.get(agent, waypoint) + self.delta.get(agent, waypoint)
    }

    /// Uniformly scales both sides.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            gamma: self.gamma.map(|v| v * factor),
            delta: self.delta.map(|v| v * factor),
        }
    }
}

/// Accepts parameters iff both matrices match the topology and are strictly
/// positive and finite on every active edge.
pub fn validate_params(topology: &NetworkTopology, params: &UtilityParams) -> Result<()> {
    let (rows, cols) = (topology.agent_count(), topology.waypoint_count());
    params.gamma.check_shape(rows, cols)?;
    params.delta.check_shape(rows, cols)?;
    for (x, y) in topology.active_edges() {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(params.gamma.get(x, y)) || !ok(params.delta.get(x, y)) {
            return Err(Error::NonPositiveCoefficient {
                agent: x,
                waypoint: y,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsMode {
    /// Each agent row sums to exactly one, each waypoint column to at most one.
    Matching,
    General,
}

/// Marginal bounds on agent rows and waypoint columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub agent_lower: Vec<f64>,
    pub agent_upper: Vec<f64>,
    pub waypoint_lower: Vec<f64>,
    pub waypoint_upper: Vec<f64>,
    pub mode: BoundsMode,
}

impl Bounds {
    pub fn matching(agent_count: usize, waypoint_count: usize) -> Self {
        Self {
            agent_lower: vec![1.0; agent_count],
            agent_upper: vec![1.0; agent_count],
            waypoint_lower: vec![0.0; waypoint_count],
            waypoint_upper: vec![1.0; waypoint_count],
            mode: BoundsMode::Matching,
        }
    }

    pub fn general(
        agent_lower: Vec<f64>,
        agent_upper: Vec<f64>,
        waypoint_lower: Vec<f64>,
        waypoint_upper: Vec<f64>,
    ) -> Result<Self> {
        let bounds = Self {
            agent_lower,
            agent_upper,
            waypoint_lower,
            waypoint_upper,
            mode: BoundsMode::General,
        };
        bounds.check()?;
        Ok(bounds)
    }

    pub fn agent(&self, agent: usize) -> (f64, f64) {
        (self.agent_lower[agent], self.agent_upper[agent])
    }

    pub fn waypoint(&self, waypoint: usize) -> (f64, f64) {
        (self.waypoint_lower[waypoint], self.waypoint_upper[waypoint])
    }

    fn check(&self) -> Result<()> {
        if self.agent_lower.len() != self.agent_upper.len()
            || self.waypoint_lower.len() != self.waypoint_upper.len()
        {
            return Err(Error::InvalidBounds("lower/upper length mismatch".into()));
        }
        let pairs = self
            .agent_lower
            .iter()
            .zip(&self.agent_upper)
            .chain(self.waypoint_lower.iter().zip(&self.waypoint_upper));
        for (&lo, &hi) in pairs {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(Error::InvalidBounds(format!(
                    "need 0 <= lower <= upper, got [{lo}, {hi}]"
                )));
            }
        }
        if self.mode == BoundsMode::Matching {
            let agents_ok = self
                .agent_lower
                .iter()
                .chain(&self.agent_upper)
                .all(|&v| v == 1.0);
            let waypoints_ok = self.waypoint_lower.iter().all(|&v| v == 0.0)
                && self.waypoint_upper.iter().all(|&v| v == 1.0);
            if !(agents_ok && waypoints_ok) {
                return Err(Error::InvalidBounds(
                    "matching mode requires agent bounds (1, 1) and waypoint bounds (0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A validated transport problem: topology, utilities and marginal bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub topology: NetworkTopology,
    pub params: UtilityParams,
    pub bounds: Bounds,
}

impl Problem {
    pub fn new(topology: NetworkTopology, params: UtilityParams, bounds: Bounds) -> Result<Self> {
        validate_params(&topology, &params)?;
        bounds.check()?;
        if bounds.agent_lower.len() != topology.agent_count()
            || bounds.waypoint_lower.len() != topology.waypoint_count()
        {
            return Err(Error::InvalidBounds(
                "bounds do not match the topology dimensions".into(),
            ));
        }
        topology.check_feasible()?;
        Ok(Self {
            topology,
            params,
            bounds,
        })
    }

    /// Fully connected matching-mode problem.
    pub fn matching(params: UtilityParams) -> Result<Self> {
        let (agents, waypoints) = params.gamma.shape();
        let topology = NetworkTopology::full(agents, waypoints)?;
        Self::new(topology, params, Bounds::matching(agents, waypoints))
    }
}

/// Injective map from agent to waypoint.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pairs: BTreeMap<usize, usize>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an assignment, rejecting any repeated waypoint.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Self::new();
        for (x, y) in pairs {
            if out.pairs.values().any(|&taken| taken == y) {
                return Err(Error::Infeasible(format!(
                    "waypoint {y} assigned to more than one agent"
                )));
            }
            out.pairs.insert(x, y);
        }
        Ok(out)
    }

    /// Checks every pair is an active edge of `topology`.
    pub fn check_against(&self, topology: &NetworkTopology) -> Result<()> {
        for (&x, &y) in &self.pairs {
            if x >= topology.agent_count()
                || y >= topology.waypoint_count()
                || !topology.is_edge_active(x, y)
            {
                return Err(Error::InvalidTopology(format!(
                    "pair ({x}, {y}) is not an active edge"
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, agent: usize) -> Option<usize> {
        self.pairs.get(&agent).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|(&x, &y)| (x, y))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Prints 1-based ids, e.g. `{1->8, 2->5, 3->10}`.
impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, y)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}->{}", x + 1, y + 1)?;
        }
        f.write_str("}")
    }
}

/// Sum of `gamma + delta` over the assigned pairs.
pub fn aggregate_utility(assignment: &Assignment, params: &UtilityParams) -> f64 {
    assignment.iter().map(|(x, y)| params.combined(x, y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn positive(rows: usize, cols: usize) -> UtilityParams {
        UtilityParams::new(
            Matrix::filled(rows, cols, 1.0),
            Matrix::filled(rows, cols, 1.0),
        )
    }

    #[test]
    fn case_study_params_validate() {
        let problem = fixtures::case_study();
        validate_params(&problem.topology, &problem.params).unwrap();
        let printed = UtilityParams::new(fixtures::printed_gamma(), fixtures::case_study_delta());
        validate_params(&problem.topology, &printed).unwrap();
    }

    #[test]
    fn zero_gamma_is_rejected() {
        let topo = NetworkTopology::full(3, 10).unwrap();
        let mut params = positive(3, 10);
        params.gamma.set(0, 0, 0.0);
        match validate_params(&topo, &params) {
            Err(Error::NonPositiveCoefficient {
                agent: 0,
                waypoint: 0,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_delta_is_rejected() {
        let topo = NetworkTopology::full(3, 10).unwrap();
        let mut params = positive(3, 10);
        params.delta.set(2, 5, -3.0);
        assert!(matches!(
            validate_params(&topo, &params),
            Err(Error::NonPositiveCoefficient {
                agent: 2,
                waypoint: 5
            })
        ));
    }

    #[test]
    fn non_finite_and_shape_errors() {
        let topo = NetworkTopology::full(2, 2).unwrap();
        let mut params = positive(2, 2);
        params.gamma.set(1, 1, f64::NAN);
        assert!(validate_params(&topo, &params).is_err());
        assert!(matches!(
            validate_params(&topo, &positive(2, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inactive_edges_are_not_checked() {
        let topo = NetworkTopology::with_edges(1, 2, [(0, 1)]).unwrap();
        let mut params = positive(1, 2);
        params.gamma.set(0, 0, -1.0);
        validate_params(&topo, &params).unwrap();
    }

    #[test]
    fn aggregate_utility_on_case_study() {
        let params = fixtures::case_study().params;
        let golden = Assignment::from_pairs([(0, 7), (1, 4), (2, 9)]).unwrap();
        assert_eq!(aggregate_utility(&golden, &params), 50.0);
        let diagonal = Assignment::from_pairs([(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(aggregate_utility(&diagonal, &params), 20.0);
        assert_eq!(aggregate_utility(&Assignment::new(), &params), 0.0);
    }

    #[test]
    fn topology_rejects_duplicates_and_flags_isolated_agents() {
        assert!(NetworkTopology::with_edges(2, 2, [(0, 0), (0, 0)]).is_err());
        assert!(NetworkTopology::with_edges(2, 2, [(0, 5)]).is_err());
        let topo = NetworkTopology::with_edges(2, 2, [(0, 0)]).unwrap();
        assert!(matches!(topo.check_feasible(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn removing_a_waypoint_drops_its_edges() {
        let mut topo = NetworkTopology::full(3, 10).unwrap();
        topo.remove_waypoint(4);
        assert_eq!(topo.active_waypoint_count(), 9);
        assert_eq!(topo.edge_count(), 27);
        assert!(topo.agents_of(4).next().is_none());
    }

    #[test]
    fn assignment_must_be_injective() {
        assert!(Assignment::from_pairs([(0, 1), (1, 1)]).is_err());
        let a = Assignment::from_pairs([(0, 7), (1, 4), (2, 9)]).unwrap();
        assert_eq!(a.to_string(), "{1->8, 2->5, 3->10}");
    }

    #[test]
    fn matching_bounds_are_enforced() {
        let mut bounds = Bounds::matching(2, 3);
        bounds.check().unwrap();
        bounds.waypoint_upper[0] = 2.0;
        assert!(bounds.check().is_err());
        assert!(Bounds::general(vec![2.0], vec![1.0], vec![0.0], vec![1.0]).is_err());
    }
}
