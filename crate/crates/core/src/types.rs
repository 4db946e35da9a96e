//! Value types shared by every layer: timestamps, players, input events and
//! the `(timestamp, player, event)` message triple.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LogError;

/// Seconds since the start of the game.
pub type Timestamp = f64;

/// A player slot in a game, numbered from zero in join order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub u32);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for PlayerId {
    fn from(id: u32) -> Self {
        PlayerId(id)
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MouseButton {
    Left,
    Middle,
    Right,
}

/// A point in application coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A user interface event, the only payload that ever travels between
/// clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum InputEvent {
    KeyPress { key: String },
    KeyRelease { key: String },
    MousePress { button: MouseButton, at: Point },
    MouseRelease { button: MouseButton, at: Point },
    MouseMovement { at: Point },
}

impl InputEvent {
    pub fn key_press(key: impl Into<String>) -> Self {
        InputEvent::KeyPress { key: key.into() }
    }

    pub fn key_release(key: impl Into<String>) -> Self {
        InputEvent::KeyRelease { key: key.into() }
    }

    pub fn mouse_movement(x: f64, y: f64) -> Self {
        InputEvent::MouseMovement { at: Point::new(x, y) }
    }

    /// Key events carry non-empty text and every point is finite.
    pub fn is_valid(&self) -> bool {
        match self {
            InputEvent::KeyPress { key } | InputEvent::KeyRelease { key } => !key.is_empty(),
            InputEvent::MousePress { at, .. }
            | InputEvent::MouseRelease { at, .. }
            | InputEvent::MouseMovement { at } => at.is_finite(),
        }
    }
}

/// A timestamped input event from one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub t: Timestamp,
    pub player: PlayerId,
    pub event: InputEvent,
}

impl Message {
    pub fn new(t: Timestamp, player: impl Into<PlayerId>, event: InputEvent) -> Self {
        Message { t, player: player.into(), event }
    }

    /// Sort key used everywhere messages are ordered.
    pub fn key(&self) -> (Timestamp, PlayerId) {
        (self.t, self.player)
    }

    pub(crate) fn validate(&self) -> Result<(), LogError> {
        check_timestamp(self.t)?;
        if !self.event.is_valid() {
            return Err(LogError::InvalidArgument(format!("malformed event {:?}", self.event)));
        }
        Ok(())
    }
}

/// Orders two `(t, player)` keys. Timestamps are finite, so the partial order
/// on floats is total here; `-0.0` and `0.0` compare equal.
pub fn compare_keys(a: (Timestamp, PlayerId), b: (Timestamp, PlayerId)) -> Ordering {
    a.0.partial_cmp(&b.0).expect("timestamps are finite").then(a.1.cmp(&b.1))
}

pub(crate) fn check_timestamp(t: Timestamp) -> Result<(), LogError> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(LogError::InvalidArgument(format!("non-finite timestamp {t}")))
    }
}
