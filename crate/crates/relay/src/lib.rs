//! Relay server: lobby with four-letter room codes, a rules-hash check
//! before start, and in-order broadcast of inputs to the other players.
//!
//! The relay never looks at timestamps or game state; ordering and
//! consistency are entirely the clients' business.

mod lobby;
mod server;

pub use lobby::{generate_code, CodesExhausted, ConnId, Outbox, Relay, Room, RoomState};
pub use server::{spawn_background, RelayConfig, RelayServer};
