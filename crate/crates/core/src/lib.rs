//! Dynamic, distributed discrete optimal transport for assigning swarm agents
//! to waypoints.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: network topology, utility parameters, bounds and assignments,
//! - [`oracle`]: exhaustive-enumeration optimum used as an independent check,
//! - [`projection`]: capped-simplex projection (the closed form of each subproblem),
//! - [`admm`]: the consensus ADMM solver,
//! - [`dynamic`]: event-driven, warm-started re-optimisation,
//! - [`sim`]: a desk-scale mission simulator with a greedy baseline,
//! - [`cli`]: the experiment harness behind the `swarm-ot` binary.

pub mod admm;
pub mod cli;
pub mod dynamic;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod projection;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    aggregate_utility, validate_params, Assignment, Bounds, BoundsMode, Matrix, NetworkTopology,
    Problem, UtilityParams,
};
