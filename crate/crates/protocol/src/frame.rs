use std::fmt;
use std::str::FromStr;

use lockstep_core::{InputEvent, PlayerId, Timestamp};

use crate::FrameError;

/// Four uppercase ASCII letters identifying a game room.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoomCode(String);

impl RoomCode {
    pub const LEN: usize = 4;

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Code from four letter indices in `0..26`.
    pub fn from_indices(idx: [u8; 4]) -> Self {
        RoomCode(idx.iter().map(|&i| (b'A' + i % 26) as char).collect())
    }
}

impl FromStr for RoomCode {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() == Self::LEN && s.bytes().all(|b| b.is_ascii_uppercase()) {
            Ok(RoomCode(s.to_owned()))
        } else {
            Err(FrameError::Schema(format!("bad room code {s:?}")))
        }
    }
}

impl fmt::Display for RoomCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Hex SHA-256 fingerprint of the game rules a client runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameHash(String);

impl GameHash {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for GameHash {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            Ok(GameHash(s.to_owned()))
        } else {
            Err(FrameError::Schema(format!("bad game hash {s:?}")))
        }
    }
}

impl fmt::Display for GameHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    BadCode,
    GameFull,
    HashMismatch,
    OutOfOrder,
    ProtocolError,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 5] = [
        ErrorCode::BadCode,
        ErrorCode::GameFull,
        ErrorCode::HashMismatch,
        ErrorCode::OutOfOrder,
        ErrorCode::ProtocolError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::BadCode => "BadCode",
            ErrorCode::GameFull => "GameFull",
            ErrorCode::HashMismatch => "HashMismatch",
            ErrorCode::OutOfOrder => "OutOfOrder",
            ErrorCode::ProtocolError => "ProtocolError",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorCode {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorCode::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| FrameError::Schema(format!("unknown error code {s:?}")))
    }
}

/// Everything that travels between clients and the relay.
///
/// Timestamps are carried as the raw IEEE-754 bit pattern so they survive
/// the trip bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    ClientHello { proto_version: u32, game_hash: GameHash },
    CreateGame { num_players: u8 },
    GameCreated { code: RoomCode },
    JoinGame { code: RoomCode },
    Joined { player: PlayerId, joined: u8, total: u8 },
    GameStarted { player: PlayerId, num_players: u8, seed: u64 },
    Input { t_bits: u64, event: InputEvent },
    Ping { t_bits: u64 },
    Relayed { t_bits: u64, player: PlayerId, event: InputEvent },
    RelayedPing { t_bits: u64, player: PlayerId },
    Error { code: ErrorCode, detail: String },
}

impl Frame {
    pub fn input(t: Timestamp, event: InputEvent) -> Self {
        Frame::Input { t_bits: t.to_bits(), event }
    }

    pub fn ping(t: Timestamp) -> Self {
        Frame::Ping { t_bits: t.to_bits() }
    }

    pub fn error(code: ErrorCode, detail: impl Into<String>) -> Self {
        Frame::Error { code, detail: detail.into() }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Frame::ClientHello { .. } => "ClientHello",
            Frame::CreateGame { .. } => "CreateGame",
            Frame::GameCreated { .. } => "GameCreated",
            Frame::JoinGame { .. } => "JoinGame",
            Frame::Joined { .. } => "Joined",
            Frame::GameStarted { .. } => "GameStarted",
            Frame::Input { .. } => "Input",
            Frame::Ping { .. } => "Ping",
            Frame::Relayed { .. } => "Relayed",
            Frame::RelayedPing { .. } => "RelayedPing",
            Frame::Error { .. } => "Error",
        }
    }
}

pub(crate) const FRAME_TYPES: [&str; 11] = [
    "ClientHello",
    "CreateGame",
    "GameCreated",
    "JoinGame",
    "Joined",
    "GameStarted",
    "Input",
    "Ping",
    "Relayed",
    "RelayedPing",
    "Error",
];
