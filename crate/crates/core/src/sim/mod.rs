//! Desk-scale mission simulator.
//!
//! Agents are constant-speed point masses (altitude deconflicted, no
//! collisions). A binary chemical sensor reads 1 at chemical waypoints.
//! The dynamic allocator re-solves on every arrival; the greedy baseline
//! fixes all routes before launch.

pub mod greedy;
pub mod message;
pub mod mission;
pub mod scenario;
pub mod utility;

pub use greedy::greedy_allocate;
pub use message::{decode_message, encode_message, WaypointMessage, MESSAGE_LEN};
pub use mission::{run_mission, Allocator, MissionReport, SimConfig, Visit};
pub use scenario::{Point, RandomScenario, Scenario};
pub use utility::{distance_to_utility, importance_update};
