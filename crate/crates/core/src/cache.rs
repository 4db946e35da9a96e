//! Memoized render state.
//!
//! Rendering queries the world many times between log mutations. The cache
//! keeps the fold of pending events up to the last query and extends it
//! forward; the final partial step to `now` always starts from the last
//! event's timestamp so chop boundaries match an uncached computation.

use crate::error::LogError;
use crate::log::{apply_events, game_step, Log};
use crate::rules::GameRules;
use crate::types::Timestamp;

#[derive(Debug, Clone)]
pub struct StateCache<W> {
    revision: u64,
    folded: usize,
    basis: Option<(Timestamp, W)>,
}

impl<W> Default for StateCache<W> {
    fn default() -> Self {
        StateCache { revision: 0, folded: 0, basis: None }
    }
}

impl<W: Clone> StateCache<W> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn invalidate(&mut self) {
        self.basis = None;
    }

    /// Revision of the log the cached basis was computed from, if any.
    pub fn revision(&self) -> Option<u64> {
        self.basis.as_ref().map(|_| self.revision)
    }

    /// Same result as [`Log::current_state`], bit for bit.
    pub fn current_state<R>(&mut self, now: Timestamp, log: &Log<W>, rules: &R) -> Result<W, LogError>
    where
        R: GameRules<World = W>,
    {
        log.check_query(now)?;
        let due = log.due(now);
        let events = log.events();

        let basis = match self.basis.take() {
            Some(basis) if self.revision == log.revision() && self.folded <= due => {
                apply_events(rules, &events[self.folded..due], basis)
            }
            _ => {
                let (t, w) = log.committed();
                apply_events(rules, &events[..due], (t, w.clone()))
            }
        };
        let (t, world) = &basis;
        let out = game_step(rules, now - *t, world.clone());

        self.revision = log.revision();
        self.folded = due;
        self.basis = Some(basis);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{InputEvent, Message, PlayerId};
    use std::cell::Cell;

    #[derive(Default)]
    struct Counting {
        handles: Cell<u32>,
    }

    impl GameRules for Counting {
        type World = (u64, f64);

        fn num_players(&self) -> usize {
            2
        }

        fn start(&self, _seed: u64) -> (u64, f64) {
            (0, 0.0)
        }

        fn step(&self, dt: f64, w: (u64, f64)) -> (u64, f64) {
            (w.0, w.1 * 0.5 + dt)
        }

        fn handle(&self, p: PlayerId, _e: &InputEvent, w: (u64, f64)) -> (u64, f64) {
            self.handles.set(self.handles.get() + 1);
            (w.0 * 31 + p.0 as u64 + 1, w.1)
        }
    }

    fn setup() -> (Counting, Log<(u64, f64)>) {
        let rules = Counting::default();
        let mut log = Log::for_rules(&rules, 0).unwrap();
        for (t, p) in [(0.3, 0), (0.4, 1), (0.9, 0), (1.2, 1)] {
            log.add_event(Message::new(t, p, InputEvent::key_press("k")), &rules).unwrap();
        }
        (rules, log)
    }

    #[test]
    fn repeated_query_skips_handle() {
        let (rules, log) = setup();
        let mut cache = StateCache::new();
        let first = cache.current_state(1.5, &log, &rules).unwrap();
        let before = rules.handles.get();
        let second = cache.current_state(1.5, &log, &rules).unwrap();
        assert_eq!(rules.handles.get(), before);
        assert_eq!(first, second);
        assert_eq!(second, log.current_state(1.5, &rules).unwrap());
    }

    #[test]
    fn forward_queries_extend_the_fold() {
        let (rules, log) = setup();
        let mut cache = StateCache::new();
        for now in [0.95, 1.0, 1.25, 2.0, 7.3] {
            let got = cache.current_state(now, &log, &rules).unwrap();
            let want = log.current_state(now, &rules).unwrap();
            assert_eq!(got.0, want.0);
            assert_eq!(got.1.to_bits(), want.1.to_bits());
        }
    }

    #[test]
    fn mutation_invalidates() {
        let (rules, mut log) = setup();
        let mut cache = StateCache::new();
        cache.current_state(2.0, &log, &rules).unwrap();
        log.add_event(Message::new(1.3, 0, InputEvent::key_press("x")), &rules).unwrap();
        assert_ne!(cache.revision(), Some(log.revision()));
        let got = cache.current_state(2.0, &log, &rules).unwrap();
        assert_eq!(got, log.current_state(2.0, &rules).unwrap());
    }

    #[test]
    fn cache_from_another_log_is_ignored() {
        let (rules, log) = setup();
        let (_, other) = setup();
        let mut cache = StateCache::new();
        cache.current_state(2.0, &other, &rules).unwrap();
        let got = cache.current_state(2.0, &log, &rules).unwrap();
        assert_eq!(got, log.current_state(2.0, &rules).unwrap());
        assert_eq!(cache.revision(), Some(log.revision()));
    }

    #[test]
    fn backward_query_recomputes() {
        let (rules, log) = setup();
        let mut cache = StateCache::new();
        cache.current_state(5.0, &log, &rules).unwrap();
        let got = cache.current_state(1.0, &log, &rules).unwrap();
        assert_eq!(got, log.current_state(1.0, &rules).unwrap());
    }
}
