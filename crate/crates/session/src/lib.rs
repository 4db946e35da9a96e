//! Client side of a lock-step game: joins a room through the relay, stamps
//! local input, feeds relayed input into the event log and renders.
//!
//! [`Session`] is transport-agnostic and driven by a [`Clock`], so the same
//! code runs against a live relay ([`Client`]) or in virtual time.

mod clock;
mod handshake;
mod session;
mod transport;

use lockstep_core::LogError;
use lockstep_protocol::{ErrorCode, FrameError};
use thiserror::Error;

pub use clock::{Clock, GameClock, ManualClock};
pub use handshake::{create_or_join, Client, LobbyEvent, Role, StartInfo};
pub use session::{Session, SessionConfig};
pub use transport::{TcpTransport, Transport};

#[derive(Debug, Error)]
pub enum SessionError {
    /// The relay or a peer broke the protocol; the game cannot continue.
    #[error("protocol fault: {0}")]
    Fault(String),
    /// The relay refused to create or join a room.
    #[error("rejected by relay ({code}): {detail}")]
    Rejected { code: ErrorCode, detail: String },
    /// The relay ended a running game.
    #[error("relay error ({code}): {detail}")]
    Server { code: ErrorCode, detail: String },
    #[error(transparent)]
    Transport(#[from] FrameError),
    #[error("invalid local input: {0}")]
    Local(#[from] LogError),
}
