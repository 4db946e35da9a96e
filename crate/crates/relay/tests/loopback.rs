use std::io::{BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpStream};
use std::thread;
use std::time::{Duration, Instant};

use lockstep_core::{InputEvent, PlayerId};
use lockstep_protocol::{game_hash, read_frame, write_frame, ErrorCode, Frame, MAX_FRAME_LEN, PROTO_VERSION};
use lockstep_relay::{spawn_background, RelayConfig};

struct Peer {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl Peer {
    fn connect(addr: SocketAddr, identity: &str) -> Peer {
        let stream = TcpStream::connect(addr).unwrap();
        stream.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
        let mut peer = Peer { reader: BufReader::new(stream.try_clone().unwrap()), writer: BufWriter::new(stream) };
        let hash = game_hash(identity, PROTO_VERSION).unwrap();
        peer.send(&Frame::ClientHello { proto_version: PROTO_VERSION, game_hash: hash });
        peer
    }

    fn send(&mut self, f: &Frame) {
        write_frame(&mut self.writer, f).unwrap();
        self.writer.flush().unwrap();
    }

    fn send_buffered(&mut self, f: &Frame) {
        write_frame(&mut self.writer, f).unwrap();
    }

    fn recv(&mut self) -> Frame {
        read_frame(&mut self.reader, MAX_FRAME_LEN).unwrap()
    }

    /// Read until `GameStarted`, returning it.
    fn await_start(&mut self) -> Frame {
        loop {
            match self.recv() {
                f @ Frame::GameStarted { .. } => return f,
                Frame::GameCreated { .. } | Frame::Joined { .. } => {}
                other => panic!("unexpected {other:?}"),
            }
        }
    }
}

fn relay() -> SocketAddr {
    spawn_background("127.0.0.1:0", RelayConfig::default()).unwrap()
}

/// Create a room for `n` players, join the rest, and return all peers in
/// player order once the game has started.
fn start_game(addr: SocketAddr, n: u8) -> (Vec<Peer>, u64) {
    let mut host = Peer::connect(addr, "loopback");
    host.send(&Frame::CreateGame { num_players: n });
    let code = match host.recv() {
        Frame::GameCreated { code } => code,
        other => panic!("expected GameCreated, got {other:?}"),
    };
    assert_eq!(host.recv(), Frame::Joined { player: PlayerId(0), joined: 1, total: n });
    let mut peers = vec![host];
    for _ in 1..n {
        let mut p = Peer::connect(addr, "loopback");
        p.send(&Frame::JoinGame { code: code.clone() });
        peers.push(p);
    }
    let mut seed = None;
    for (i, p) in peers.iter_mut().enumerate() {
        match p.await_start() {
            Frame::GameStarted { player, num_players, seed: s } => {
                assert_eq!(player, PlayerId(i as u32));
                assert_eq!(num_players, n);
                assert_eq!(*seed.get_or_insert(s), s, "all players share one seed");
            }
            _ => unreachable!(),
        }
    }
    (peers, seed.unwrap())
}

#[test]
fn create_join_and_start() {
    let addr = relay();
    let (peers, _) = start_game(addr, 2);
    assert_eq!(peers.len(), 2);
}

#[test]
fn concurrent_senders_keep_their_order_and_never_see_themselves() {
    const FRAMES: u32 = 1000;
    let started = Instant::now();
    let addr = relay();
    let (peers, _) = start_game(addr, 3);

    let handles: Vec<_> = peers
        .into_iter()
        .enumerate()
        .map(|(me, mut peer)| {
            thread::spawn(move || {
                for i in 0..FRAMES {
                    let t = i as f64 * 0.01;
                    if i % 10 == 9 {
                        peer.send_buffered(&Frame::ping(t));
                    } else {
                        peer.send_buffered(&Frame::input(t, InputEvent::key_press(format!("{me}:{i}"))));
                    }
                }
                peer.writer.flush().unwrap();

                let mut next = [0u32; 3];
                for _ in 0..2 * FRAMES {
                    let (from, t_bits, label) = match peer.recv() {
                        Frame::Relayed { t_bits, player, event: InputEvent::KeyPress { key } } => {
                            (player, t_bits, Some(key))
                        }
                        Frame::RelayedPing { t_bits, player } => (player, t_bits, None),
                        other => panic!("unexpected {other:?}"),
                    };
                    let p = from.index();
                    assert_ne!(p, me, "relay echoed a frame back to its sender");
                    let i = next[p];
                    assert_eq!(f64::from_bits(t_bits), i as f64 * 0.01, "frame {i} from {from}");
                    if let Some(label) = label {
                        assert_eq!(label, format!("{p}:{i}"));
                    } else {
                        assert_eq!(i % 10, 9);
                    }
                    next[p] += 1;
                }
                let expected: Vec<u32> = (0..3).map(|p| if p == me { 0 } else { FRAMES }).collect();
                assert_eq!(next.to_vec(), expected);
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert!(started.elapsed() < Duration::from_secs(10));
}

#[test]
fn mismatched_hash_closes_the_room() {
    let addr = relay();
    let mut host = Peer::connect(addr, "rules-a");
    host.send(&Frame::CreateGame { num_players: 2 });
    let code = match host.recv() {
        Frame::GameCreated { code } => code,
        other => panic!("{other:?}"),
    };
    host.recv();
    let mut guest = Peer::connect(addr, "rules-b");
    guest.send(&Frame::JoinGame { code: code.clone() });

    for p in [&mut host, &mut guest] {
        let err = loop {
            match p.recv() {
                Frame::Error { code, .. } => break code,
                Frame::Joined { .. } => {}
                other => panic!("{other:?}"),
            }
        };
        assert_eq!(err, ErrorCode::HashMismatch);
    }

    // the room is gone
    let mut late = Peer::connect(addr, "rules-a");
    late.send(&Frame::JoinGame { code });
    assert!(matches!(late.recv(), Frame::Error { code: ErrorCode::BadCode, .. }));
}

#[test]
fn oversized_frame_is_a_protocol_error() {
    let addr = spawn_background("127.0.0.1:0", RelayConfig { frame_cap: 64, ..RelayConfig::default() }).unwrap();
    let mut p = Peer::connect(addr, "loopback");
    p.send(&Frame::input(0.0, InputEvent::key_press("x".repeat(200))));
    assert!(matches!(p.recv(), Frame::Error { code: ErrorCode::ProtocolError, .. }));
}
