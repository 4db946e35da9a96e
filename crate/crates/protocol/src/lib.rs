//! Wire format shared by the relay server and its clients.
//!
//! See `docs/protocol.md` at the repository root for the byte-level layout.

mod codec;
mod frame;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use codec::{
    decode_frame, decode_frame_capped, decode_payload, encode_frame, encode_payload, read_frame, write_frame,
    LEN_PREFIX, MAX_FRAME_LEN,
};
pub use frame::{ErrorCode, Frame, GameHash, RoomCode};

/// Version of this wire format; part of every game hash.
pub const PROTO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("frame of {len} bytes exceeds the {cap} byte cap")]
    TooLarge { len: usize, cap: usize },
    #[error("truncated frame: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("{0} bytes after the end of the frame")]
    TrailingBytes(usize),
    #[error("payload is not valid UTF-8")]
    Utf8,
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("unknown frame type {0:?}")]
    UnknownType(String),
    #[error("connection closed")]
    Closed,
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rules identity must not be empty")]
pub struct EmptyIdentity;

/// Fingerprint of a rules implementation: hex SHA-256 over the big-endian
/// protocol version followed by the identity string. Clients whose hashes
/// differ are refused a shared game.
pub fn game_hash(rules_identity: &str, proto_version: u32) -> Result<GameHash, EmptyIdentity> {
    if rules_identity.is_empty() {
        return Err(EmptyIdentity);
    }
    let mut h = Sha256::new();
    h.update(proto_version.to_be_bytes());
    h.update(rules_identity.as_bytes());
    Ok(hex::encode(h.finalize()).parse().expect("sha256 hex is a valid game hash"))
}
