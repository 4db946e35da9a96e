//! TCP front end for [`Relay`].
//!
//! One reader task per connection decodes frames and feeds them to the
//! shared relay under a lock; outputs are pushed onto per-connection queues
//! while the lock is still held, so every queue sees frames in the order the
//! relay produced them. A writer task per connection drains its queue.

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use lockstep_protocol::{decode_payload, encode_frame, ErrorCode, Frame, FrameError, LEN_PREFIX, MAX_FRAME_LEN};
use rand::rngs::StdRng;
use rand::SeedableRng;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::tcp::OwnedReadHalf;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tracing::{debug, info, warn};

use crate::lobby::{ConnId, Outbox, Relay};

#[derive(Debug, Clone)]
pub struct RelayConfig {
    pub max_rooms: usize,
    pub frame_cap: usize,
}

impl Default for RelayConfig {
    fn default() -> Self {
        RelayConfig { max_rooms: 10_000, frame_cap: MAX_FRAME_LEN }
    }
}

struct Shared {
    relay: Relay<StdRng>,
    queues: HashMap<ConnId, mpsc::UnboundedSender<Frame>>,
    next_conn: u64,
}

impl Shared {
    fn dispatch(&self, out: Outbox) {
        for (conn, frame) in out {
            if let Some(q) = self.queues.get(&conn) {
                // A closed queue means the peer is already going away.
                let _ = q.send(frame);
            }
        }
    }
}

pub struct RelayServer {
    listener: TcpListener,
    config: RelayConfig,
    shared: Arc<Mutex<Shared>>,
}

impl RelayServer {
    pub async fn bind(addr: impl tokio::net::ToSocketAddrs, config: RelayConfig) -> io::Result<Self> {
        let listener = TcpListener::bind(addr).await?;
        let relay = Relay::new(StdRng::from_entropy(), config.max_rooms);
        Ok(RelayServer {
            listener,
            config,
            shared: Arc::new(Mutex::new(Shared { relay, queues: HashMap::new(), next_conn: 1 })),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accept connections forever.
    pub async fn run(self) -> io::Result<()> {
        info!(addr = %self.listener.local_addr()?, "relay listening");
        loop {
            let (stream, peer) = self.listener.accept().await?;
            let _ = stream.set_nodelay(true);
            let shared = Arc::clone(&self.shared);
            let cap = self.config.frame_cap;
            tokio::spawn(async move {
                serve_connection(stream, peer, shared, cap).await;
            });
        }
    }
}

async fn read_frame(r: &mut OwnedReadHalf, cap: usize) -> Result<Frame, FrameError> {
    let mut prefix = [0u8; LEN_PREFIX];
    r.read_exact(&mut prefix).await?;
    let len = u32::from_be_bytes(prefix) as usize;
    if len > cap {
        return Err(FrameError::TooLarge { len, cap });
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).await?;
    decode_payload(&body)
}

async fn serve_connection(stream: TcpStream, peer: SocketAddr, shared: Arc<Mutex<Shared>>, cap: usize) {
    let (mut reader, mut writer) = stream.into_split();
    let (tx, mut rx) = mpsc::unbounded_channel::<Frame>();
    let conn = {
        let mut s = shared.lock().unwrap();
        let conn = ConnId(s.next_conn);
        s.next_conn += 1;
        s.queues.insert(conn, tx.clone());
        conn
    };
    debug!(?conn, %peer, "connected");

    let writer_task = tokio::spawn(async move {
        while let Some(frame) = rx.recv().await {
            let bytes = match encode_frame(&frame) {
                Ok(b) => b,
                Err(e) => {
                    warn!(?conn, "dropping unencodable frame: {e}");
                    continue;
                }
            };
            if writer.write_all(&bytes).await.is_err() {
                break;
            }
        }
        let _ = writer.shutdown().await;
    });

    loop {
        match read_frame(&mut reader, cap).await {
            Ok(frame) => {
                let s = &mut *shared.lock().unwrap();
                let out = s.relay.handle_frame(conn, frame);
                s.dispatch(out);
            }
            Err(FrameError::Closed) => break,
            Err(FrameError::Io(e)) => {
                debug!(?conn, "read failed: {e}");
                break;
            }
            Err(e) => {
                warn!(?conn, "bad frame: {e}");
                let _ = tx.send(Frame::error(ErrorCode::ProtocolError, e.to_string()));
                break;
            }
        }
    }

    {
        let s = &mut *shared.lock().unwrap();
        let out = s.relay.disconnect(conn);
        s.dispatch(out);
        s.queues.remove(&conn);
    }
    drop(tx);
    let _ = writer_task.await;
    debug!(?conn, "disconnected");
}

/// Start a relay on `addr` in a background thread with its own runtime.
/// Returns the bound address. Intended for tests and local tooling.
pub fn spawn_background(addr: &str, config: RelayConfig) -> io::Result<SocketAddr> {
    let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
    let server = runtime.block_on(RelayServer::bind(addr.to_owned(), config))?;
    let local = server.local_addr()?;
    std::thread::Builder::new().name("relay".into()).spawn(move || {
        if let Err(e) = runtime.block_on(server.run()) {
            warn!("relay stopped: {e}");
        }
    })?;
    Ok(local)
}
