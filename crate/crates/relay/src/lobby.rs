//! Transport-free relay logic: rooms, the join handshake and broadcast.
//!
//! [`Relay::handle_frame`] consumes one frame from one connection and
//! returns the frames to send, in order. The caller must deliver each
//! returned list in order and must not interleave two calls' outputs; that
//! is all the ordering the clients rely on.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use lockstep_core::PlayerId;
use lockstep_protocol::{ErrorCode, Frame, GameHash, RoomCode, PROTO_VERSION};
use rand::RngCore;
use thiserror::Error;
use tracing::{debug, info};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConnId(pub u64);

pub type Outbox = Vec<(ConnId, Frame)>;

const CODE_SPACE: usize = 26 * 26 * 26 * 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("all {CODE_SPACE} room codes are in use")]
pub struct CodesExhausted;

/// A uniformly random code not in `occupied`.
pub fn generate_code<R: RngCore>(occupied: &BTreeSet<RoomCode>, rng: &mut R) -> Result<RoomCode, CodesExhausted> {
    if occupied.len() >= CODE_SPACE {
        return Err(CodesExhausted);
    }
    let draw = |n: u32| -> [u8; 4] { [(n / 17576) as u8, (n / 676 % 26) as u8, (n / 26 % 26) as u8, (n % 26) as u8] };
    for _ in 0..64 {
        let code = RoomCode::from_indices(draw(rng.next_u32() % CODE_SPACE as u32));
        if !occupied.contains(&code) {
            return Ok(code);
        }
    }
    // Nearly full: pick uniformly among the free codes directly.
    let free: Vec<RoomCode> =
        (0..CODE_SPACE as u32).map(|n| RoomCode::from_indices(draw(n))).filter(|c| !occupied.contains(c)).collect();
    Ok(free[rng.next_u32() as usize % free.len()].clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoomState {
    Lobby,
    Running,
}

#[derive(Debug, Clone)]
struct Member {
    conn: ConnId,
    hash: GameHash,
}

#[derive(Debug, Clone)]
pub struct Room {
    required: u8,
    members: Vec<Member>,
    state: RoomState,
}

impl Room {
    pub fn state(&self) -> RoomState {
        self.state
    }

    pub fn joined(&self) -> usize {
        self.members.len()
    }

    pub fn required(&self) -> u8 {
        self.required
    }

    pub fn members(&self) -> impl Iterator<Item = ConnId> + '_ {
        self.members.iter().map(|m| m.conn)
    }

    fn progress(&self, out: &mut Outbox) {
        let joined = self.members.len() as u8;
        for (i, m) in self.members.iter().enumerate() {
            out.push((m.conn, Frame::Joined { player: PlayerId(i as u32), joined, total: self.required }));
        }
    }

    fn broadcast(&self, frame: Frame, out: &mut Outbox) {
        out.extend(self.members.iter().map(|m| (m.conn, frame.clone())));
    }
}

#[derive(Debug, Default)]
struct Conn {
    hash: Option<GameHash>,
    room: Option<RoomCode>,
}

pub struct Relay<R> {
    rng: R,
    max_rooms: usize,
    rooms: BTreeMap<RoomCode, Room>,
    conns: HashMap<ConnId, Conn>,
}

fn protocol_error(conn: ConnId, detail: impl Into<String>) -> Outbox {
    vec![(conn, Frame::error(ErrorCode::ProtocolError, detail))]
}

impl<R: RngCore> Relay<R> {
    /// `rng` picks room codes and game seeds.
    pub fn new(rng: R, max_rooms: usize) -> Self {
        Relay { rng, max_rooms, rooms: BTreeMap::new(), conns: HashMap::new() }
    }

    pub fn room(&self, code: &RoomCode) -> Option<&Room> {
        self.rooms.get(code)
    }

    pub fn room_count(&self) -> usize {
        self.rooms.len()
    }

    pub fn handle_frame(&mut self, conn: ConnId, frame: Frame) -> Outbox {
        let state = self.conns.entry(conn).or_default();
        match frame {
            Frame::ClientHello { proto_version, game_hash } => {
                if proto_version != PROTO_VERSION {
                    return protocol_error(conn, format!("unsupported protocol version {proto_version}"));
                }
                if state.room.is_some() {
                    return protocol_error(conn, "hello after joining a room");
                }
                state.hash = Some(game_hash);
                Vec::new()
            }
            _ if state.hash.is_none() => protocol_error(conn, "ClientHello required first"),
            Frame::CreateGame { num_players } => self.create(conn, num_players),
            Frame::JoinGame { code } => self.join(conn, code),
            Frame::Input { t_bits, event } => {
                self.relay(conn, |player| Frame::Relayed { t_bits, player, event: event.clone() })
            }
            Frame::Ping { t_bits } => self.relay(conn, |player| Frame::RelayedPing { t_bits, player }),
            other => protocol_error(conn, format!("{} is not a client frame", other.type_name())),
        }
    }

    fn create(&mut self, conn: ConnId, num_players: u8) -> Outbox {
        if num_players == 0 {
            return protocol_error(conn, "a game needs at least one player");
        }
        if self.conns[&conn].room.is_some() {
            return protocol_error(conn, "already in a room");
        }
        if self.rooms.len() >= self.max_rooms {
            return protocol_error(conn, "server full");
        }
        let occupied: BTreeSet<RoomCode> = self.rooms.keys().cloned().collect();
        let code = match generate_code(&occupied, &mut self.rng) {
            Ok(code) => code,
            Err(e) => return protocol_error(conn, e.to_string()),
        };
        info!(%code, num_players, "room created");
        self.rooms.insert(code.clone(), Room { required: num_players, members: Vec::new(), state: RoomState::Lobby });
        let mut out = vec![(conn, Frame::GameCreated { code: code.clone() })];
        out.extend(self.join(conn, code));
        out
    }

    fn join(&mut self, conn: ConnId, code: RoomCode) -> Outbox {
        let hash = {
            let state = &self.conns[&conn];
            if state.room.is_some() {
                return protocol_error(conn, "already in a room");
            }
            state.hash.clone().expect("hello checked")
        };
        let Some(room) = self.rooms.get_mut(&code) else {
            return vec![(conn, Frame::error(ErrorCode::BadCode, format!("no room {code}")))];
        };
        if room.state == RoomState::Running || room.members.len() >= room.required as usize {
            return vec![(conn, Frame::error(ErrorCode::GameFull, format!("room {code} is full")))];
        }
        room.members.push(Member { conn, hash });
        self.conns.get_mut(&conn).unwrap().room = Some(code.clone());

        let mut out = Outbox::new();
        room.progress(&mut out);
        if room.members.len() == room.required as usize {
            let first = &room.members[0].hash;
            if room.members.iter().all(|m| &m.hash == first) {
                let seed = self.rng.next_u64();
                room.state = RoomState::Running;
                let n = room.required;
                for (i, m) in room.members.iter().enumerate() {
                    out.push((m.conn, Frame::GameStarted { player: PlayerId(i as u32), num_players: n, seed }));
                }
                info!(%code, "game started");
            } else {
                room.broadcast(Frame::error(ErrorCode::HashMismatch, "players run different game rules"), &mut out);
                self.close(&code);
            }
        }
        out
    }

    fn relay(&mut self, conn: ConnId, make: impl Fn(PlayerId) -> Frame) -> Outbox {
        let room = self.conns[&conn].room.as_ref().and_then(|c| self.rooms.get(c));
        let Some(room) = room.filter(|r| r.state == RoomState::Running) else {
            return protocol_error(conn, "game not running");
        };
        let sender = room.members.iter().position(|m| m.conn == conn).expect("member of its room");
        let frame = make(PlayerId(sender as u32));
        room.members.iter().filter(|m| m.conn != conn).map(|m| (m.conn, frame.clone())).collect()
    }

    fn close(&mut self, code: &RoomCode) {
        if let Some(room) = self.rooms.remove(code) {
            debug!(%code, "room closed");
            for m in room.members {
                if let Some(c) = self.conns.get_mut(&m.conn) {
                    c.room = None;
                }
            }
        }
    }

    pub fn disconnect(&mut self, conn: ConnId) -> Outbox {
        let Some(state) = self.conns.remove(&conn) else {
            return Vec::new();
        };
        let Some(code) = state.room else {
            return Vec::new();
        };
        let room = self.rooms.get_mut(&code).expect("connection's room exists");
        room.members.retain(|m| m.conn != conn);
        let mut out = Outbox::new();
        match room.state {
            RoomState::Lobby if room.members.is_empty() => self.close(&code),
            RoomState::Lobby => room.progress(&mut out),
            RoomState::Running => {
                // A silent player would freeze everyone's commit horizon.
                room.broadcast(Frame::error(ErrorCode::ProtocolError, "player left"), &mut out);
                self.close(&code);
            }
        }
        out
    }
}
