use clap::Parser;
use lockstep_relay::{RelayConfig, RelayServer};
use tracing::Level;

/// Lobby and broadcast relay for lockstep games.
#[derive(Parser, Debug)]
#[command(name = "relay", version)]
struct Args {
    /// Address to listen on, e.g. 0.0.0.0:7878
    #[arg(long)]
    listen: String,
    #[arg(long, default_value_t = 10_000)]
    max_rooms: usize,
    /// Largest accepted frame payload in bytes
    #[arg(long, default_value_t = lockstep_protocol::MAX_FRAME_LEN)]
    frame_cap: usize,
    /// error, warn, info, debug or trace
    #[arg(long, default_value = "info")]
    log_level: Level,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    tracing_subscriber::fmt().with_max_level(args.log_level).init();
    let config = RelayConfig { max_rooms: args.max_rooms, frame_cap: args.frame_cap };
    RelayServer::bind(args.listen.as_str(), config).await?.run().await
}
