//! Lock-step simulation engine.
//!
//! Every client holds the full game state and exchanges only timestamped
//! input events. A [`Log`] folds events into a committed snapshot once no
//! player can send anything earlier, and replays the still-pending events on
//! demand to produce the current world. [`StateCache`] memoizes that replay
//! for rendering and [`SmoothingBuffer`] hides the jump caused by late remote
//! events. The [`det`] module supplies bit-reproducible math for the game
//! rules themselves.

mod cache;
pub mod det;
mod error;
mod log;
mod rules;
mod smoothing;
mod types;

pub use cache::StateCache;
pub use det::{det_cos, det_exp, det_ln, det_sin, det_tan, DetFloat, DetRng};
pub use error::LogError;
pub use log::{apply_events, game_step, sort_messages, Log, GAME_RATE};
pub use rules::{GameRules, StateDigest};
pub use smoothing::{apparent_time, SmoothingBuffer, SmoothingEntry, DEFAULT_WINDOW};
pub use types::{compare_keys, InputEvent, Message, MouseButton, PlayerId, Point, Timestamp};
