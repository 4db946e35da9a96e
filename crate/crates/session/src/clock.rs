use std::cell::Cell;
use std::rc::Rc;
use std::time::Instant;

use lockstep_core::Timestamp;

/// Source of game time in seconds. Must never go backwards.
pub trait Clock {
    fn now(&self) -> Timestamp;
}

/// Monotonic wall clock measured from the moment the game started.
#[derive(Debug, Clone, Copy)]
pub struct GameClock {
    epoch: Instant,
}

impl GameClock {
    pub fn start() -> Self {
        GameClock { epoch: Instant::now() }
    }

    pub fn from_epoch(epoch: Instant) -> Self {
        GameClock { epoch }
    }
}

impl Clock for GameClock {
    fn now(&self) -> Timestamp {
        self.epoch.elapsed().as_secs_f64()
    }
}

/// A clock advanced by hand; clones share the same time. Used for virtual
/// time in simulations and tests.
#[derive(Debug, Clone, Default)]
pub struct ManualClock(Rc<Cell<f64>>);

impl ManualClock {
    pub fn new(t: Timestamp) -> Self {
        ManualClock(Rc::new(Cell::new(t)))
    }

    /// Moves the clock to `t`; earlier times are ignored.
    pub fn set(&self, t: Timestamp) {
        if t > self.0.get() {
            self.0.set(t);
        }
    }

    pub fn advance(&self, dt: f64) {
        self.set(self.0.get() + dt);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Timestamp {
        self.0.get()
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now(&self) -> Timestamp {
        (**self).now()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manual_clock_is_shared_and_monotone() {
        let a = ManualClock::new(1.0);
        let b = a.clone();
        a.advance(0.5);
        assert_eq!(b.now(), 1.5);
        b.set(1.0);
        assert_eq!(a.now(), 1.5);
    }

    #[test]
    fn game_clock_does_not_go_backwards() {
        let c = GameClock::start();
        let t0 = c.now();
        let t1 = c.now();
        assert!(t0 >= 0.0 && t1 >= t0);
    }
}
