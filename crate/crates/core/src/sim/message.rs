//! Three-integer waypoint report exchanged between agents.
//!
//! Wire format: 12 bytes, three little-endian `i32` in the order
//! `agent_id`, `waypoint_id`, `reading`.

use crate::error::{Error, Result};

pub const MESSAGE_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WaypointMessage {
    pub agent_id: i32,
    pub waypoint_id: i32,
    /// Binary sensor reading, 0 or 1.
    pub reading: i32,
}

impl WaypointMessage {
    pub fn new(agent_id: i32, waypoint_id: i32, reading: i32) -> Result<Self> {
        if !matches!(reading, 0 | 1) {
            return Err(Error::InvalidReading(reading));
        }
        Ok(Self {
            agent_id,
            waypoint_id,
            reading,
        })
    }
}

pub fn encode_message(msg: &WaypointMessage) -> [u8; MESSAGE_LEN] {
    debug_assert!(matches!(msg.reading, 0 | 1));
    let mut out = [0u8; MESSAGE_LEN];
    out[0..4].copy_from_slice(&msg.agent_id.to_le_bytes());
    out[4..8].copy_from_slice(&msg.waypoint_id.to_le_bytes());
    out[8..12].copy_from_slice(&msg.reading.to_le_bytes());
    out
}

pub fn decode_message(bytes: &[u8]) -> Result<WaypointMessage> {
    let bytes: &[u8; MESSAGE_LEN] = bytes
        .try_into()
        .map_err(|_| Error::WrongLength(bytes.len()))?;
    let field = |i: usize| i32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    WaypointMessage::new(field(0), field(4), field(8))
}
