use thiserror::Error;

use crate::types::{PlayerId, Timestamp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("messages out of order: {player} sent t={t} after t={latest}")]
    OutOfOrder { player: PlayerId, t: Timestamp, latest: Timestamp },
    #[error("cannot look into the past: now={now} is before the commit horizon {horizon}")]
    QueryInPast { now: Timestamp, horizon: Timestamp },
}
