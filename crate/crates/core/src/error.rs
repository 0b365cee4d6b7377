use std::path::PathBuf;

use crate::admm::{AdmmState, ConvergenceReport};

/// Errors raised across the solver, the dynamic layer and the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is {found_rows}x{found_cols}, expected {expected_rows}x{expected_cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    #[error("coefficient on edge (agent {agent}, waypoint {waypoint}) must be finite and > 0")]
    NonPositiveCoefficient { agent: usize, waypoint: usize },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("enumeration guard exceeded: {agents} agents (limit {limit})")]
    TooLarge { agents: usize, limit: usize },

    #[error("solver did not converge within {} iterations", .0.1.iterations)]
    MaxIterationsExceeded(Box<(AdmmState, ConvergenceReport)>),

    #[error("plan has not converged (primal residual {residual:e} >= {epsilon:e})")]
    NotConverged { residual: f64, epsilon: f64 },

    #[error("epoch {epoch} did not re-converge within {budget} iterations")]
    EpochBudgetExceeded { epoch: usize, budget: usize },

    #[error("unknown or inactive {kind} {id}")]
    UnknownEntity { kind: &'static str, id: usize },

    #[error("waypoint {0} has already been visited")]
    RevisitAttempt(usize),

    #[error("agent {agent} reached waypoint {waypoint} but is assigned to waypoint {assigned}")]
    NotCurrentAssignment {
        agent: usize,
        waypoint: usize,
        assigned: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("failed to parse scenario {path}: line {line}, column {column}: {message}")]
    ScenarioParse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("cannot read scenario {path}: {source}")]
    ScenarioRead {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("mission stalled: agent {agent} has no reachable unvisited waypoint")]
    Stalled { agent: usize },

    #[error("message must be 12 bytes, got {0}")]
    WrongLength(usize),

    #[error("message reading must be 0 or 1, got {0}")]
    InvalidReading(i32),

    #[error("assignment mismatch: expected {expected}, got {actual}")]
    GoldenMismatch { expected: String, actual: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
