//! Rendering-time interpolation of late remote events.
//!
//! A remote event that arrives after its own timestamp is first shown as if
//! it happened at its arrival time, then slid back to its true time over a
//! short window. Only the rendered state is affected; the authoritative
//! [`Log`] never changes.

use crate::error::LogError;
use crate::log::{game_step, Log};
use crate::rules::GameRules;
use crate::types::{compare_keys, Message, Timestamp};

pub const DEFAULT_WINDOW: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingEntry {
    pub msg: Message,
    /// Local game time at which the message was received.
    pub arrival: Timestamp,
}

impl SmoothingEntry {
    pub fn apparent_time(&self, now: Timestamp, window: f64) -> Timestamp {
        apparent_time(self.msg.t, self.arrival, now, window)
    }
}

/// Where a late event appears to be at `now`: starts at `arrival` and moves
/// linearly back to `actual` over `window` seconds. Never below `actual`,
/// never above `max(actual, arrival)`, non-increasing in `now`.
pub fn apparent_time(actual: Timestamp, arrival: Timestamp, now: Timestamp, window: f64) -> Timestamp {
    debug_assert!(window > 0.0);
    if arrival <= actual {
        return actual;
    }
    // Compared as a sum too, so the window ends exactly where `prune`
    // drops the entry.
    let progress = (now - arrival) / window;
    if progress >= 1.0 || now >= arrival + window {
        return actual;
    }
    let progress = progress.max(0.0);
    (arrival + (actual - arrival) * progress).max(actual)
}

#[derive(Debug, Clone)]
pub struct SmoothingBuffer {
    window: f64,
    entries: Vec<SmoothingEntry>,
}

impl Default for SmoothingBuffer {
    fn default() -> Self {
        SmoothingBuffer::new(DEFAULT_WINDOW)
    }
}

impl SmoothingBuffer {
    /// # Panics
    ///
    /// If `window` is not a positive finite number.
    pub fn new(window: f64) -> Self {
        assert!(window.is_finite() && window > 0.0, "smoothing window must be positive");
        SmoothingBuffer { window, entries: Vec::new() }
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn entries(&self) -> &[SmoothingEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Record a remote message received at local time `local_now`. Entries
    /// whose window has fully elapsed are dropped.
    pub fn note_arrival(&mut self, msg: Message, local_now: Timestamp) {
        self.prune(local_now);
        self.entries.push(SmoothingEntry { msg, arrival: local_now });
    }

    pub fn prune(&mut self, now: Timestamp) {
        let window = self.window;
        self.entries.retain(|e| now < e.arrival + window);
    }

    /// True once every entry sits at its actual timestamp.
    pub fn settled(&self, now: Timestamp) -> bool {
        self.entries.iter().all(|e| e.apparent_time(now, self.window) == e.msg.t)
    }

    /// The world at `now` with every buffered event shifted to its apparent
    /// time. Equals [`Log::current_state`] once the buffer has settled.
    pub fn smoothed_state<R>(&self, now: Timestamp, log: &Log<R::World>, rules: &R) -> Result<R::World, LogError>
    where
        R: GameRules,
    {
        log.check_query(now)?;
        let mut used = vec![false; self.entries.len()];
        let mut shifted: Vec<(Timestamp, &Message)> = log
            .events()
            .iter()
            .map(|m| {
                let hit = self.entries.iter().enumerate().find(|(i, e)| !used[*i] && e.msg == *m);
                let t = match hit {
                    Some((i, e)) => {
                        used[i] = true;
                        e.apparent_time(now, self.window)
                    }
                    None => m.t,
                };
                (t, m)
            })
            .filter(|(t, _)| *t <= now)
            .collect();
        shifted.sort_by(|a, b| compare_keys((a.0, a.1.player), (b.0, b.1.player)));

        let (t0, w0) = log.committed();
        let (t, world) = shifted.iter().fold((t0, w0.clone()), |(t_prev, world), (t, m)| {
            let world = game_step(rules, t - t_prev, world);
            (*t, rules.handle(m.player, &m.event, world))
        });
        Ok(game_step(rules, now - t, world))
    }
}
