use std::time::{Duration, Instant};

use lockstep_core::{GameRules, InputEvent, PlayerId};
use lockstep_protocol::{game_hash, Frame, FrameError, RoomCode, PROTO_VERSION};
use tracing::{debug, info};

use crate::clock::GameClock;
use crate::session::{Session, SessionConfig};
use crate::transport::Transport;
use crate::SessionError;

/// How long a single receive waits while the client is pumping frames.
const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Role {
    Create { num_players: u8 },
    Join { code: RoomCode },
}

/// Lobby progress reported while waiting for the game to start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LobbyEvent {
    Created(RoomCode),
    Joined { joined: u8, total: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartInfo {
    pub player: PlayerId,
    pub num_players: u8,
    pub seed: u64,
    /// Room code, when known (always for creators).
    pub code: Option<RoomCode>,
}

/// Say hello, create or join a room and block until the relay starts the
/// game. `on_lobby` sees every lobby update, e.g. to show the room code.
pub fn create_or_join<T: Transport>(
    transport: &mut T,
    rules_identity: &str,
    role: Role,
    mut on_lobby: impl FnMut(&LobbyEvent),
) -> Result<StartInfo, SessionError> {
    let hash = game_hash(rules_identity, PROTO_VERSION).map_err(|e| SessionError::Fault(e.to_string()))?;
    transport.send(&Frame::ClientHello { proto_version: PROTO_VERSION, game_hash: hash })?;
    let mut code = match &role {
        Role::Create { num_players } => {
            transport.send(&Frame::CreateGame { num_players: *num_players })?;
            None
        }
        Role::Join { code } => {
            transport.send(&Frame::JoinGame { code: code.clone() })?;
            Some(code.clone())
        }
    };
    loop {
        let Some(frame) = transport.recv(Duration::from_secs(3600))? else {
            continue;
        };
        match frame {
            Frame::GameCreated { code: c } => {
                info!(code = %c, "room created");
                on_lobby(&LobbyEvent::Created(c.clone()));
                code = Some(c);
            }
            Frame::Joined { joined, total, .. } => {
                debug!(joined, total, "lobby");
                on_lobby(&LobbyEvent::Joined { joined, total });
            }
            Frame::GameStarted { player, num_players, seed } => {
                info!(%player, num_players, "game started");
                return Ok(StartInfo { player, num_players, seed, code });
            }
            Frame::Error { code, detail } => return Err(SessionError::Rejected { code, detail }),
            other => {
                return Err(SessionError::Fault(format!("unexpected {} in lobby", other.type_name())));
            }
        }
    }
}

/// A live session wired to a relay connection and the wall clock.
pub struct Client<R: GameRules, T> {
    session: Session<R, GameClock>,
    transport: T,
}

impl<R: GameRules, T: Transport> Client<R, T> {
    /// Run the lobby handshake and start the game clock.
    pub fn start(
        mut transport: T,
        rules: R,
        rules_identity: &str,
        role: Role,
        config: SessionConfig,
        on_lobby: impl FnMut(&LobbyEvent),
    ) -> Result<(Self, StartInfo), SessionError> {
        let info = create_or_join(&mut transport, rules_identity, role, on_lobby)?;
        let session =
            Session::new(info.player, info.num_players as usize, info.seed, rules, GameClock::start(), config)?;
        Ok((Client { session, transport }, info))
    }

    pub fn session(&self) -> &Session<R, GameClock> {
        &self.session
    }

    pub fn session_mut(&mut self) -> &mut Session<R, GameClock> {
        &mut self.session
    }

    pub fn submit(&mut self, event: InputEvent) -> Result<(), SessionError> {
        if let Some(frame) = self.session.submit_local(event)? {
            self.transport.send(&frame)?;
        }
        Ok(())
    }

    /// Drain frames that arrive within `budget`, then run the tick. Returns
    /// the number of frames ingested.
    pub fn pump(&mut self, budget: Duration) -> Result<usize, SessionError> {
        let deadline = Instant::now() + budget;
        let mut n = 0;
        loop {
            let wait = deadline.saturating_duration_since(Instant::now()).min(POLL);
            match self.transport.recv(wait) {
                Ok(Some(frame)) => {
                    self.session.on_frame(frame)?;
                    n += 1;
                }
                Ok(None) => {}
                Err(FrameError::Closed) => return Err(SessionError::Fault("relay closed the connection".into())),
                Err(e) => return Err(e.into()),
            }
            if Instant::now() >= deadline {
                break;
            }
        }
        self.tick()?;
        Ok(n)
    }

    pub fn tick(&mut self) -> Result<(), SessionError> {
        if let Some(frame) = self.session.tick()? {
            self.transport.send(&frame)?;
        }
        Ok(())
    }

    pub fn render(&mut self) -> Result<R::World, SessionError> {
        self.session.render()
    }
}
