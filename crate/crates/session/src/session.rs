use lockstep_core::{
    GameRules, InputEvent, Log, LogError, Message, PlayerId, SmoothingBuffer, StateCache, Timestamp, DEFAULT_WINDOW,
};
use lockstep_protocol::{ErrorCode, Frame};
use tracing::trace;

use crate::clock::Clock;
use crate::SessionError;

#[derive(Debug, Clone)]
pub struct SessionConfig {
    /// Send a ping after this many seconds without local input.
    pub ping_interval: f64,
    pub smoothing_window: f64,
    /// If set, local mouse movements are limited to this many per second;
    /// the latest suppressed movement is sent on a later tick.
    pub mouse_rate_limit: Option<f64>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { ping_interval: 1.0, smoothing_window: DEFAULT_WINDOW, mouse_rate_limit: None }
    }
}

/// One player's view of a running game.
pub struct Session<R: GameRules, C> {
    player: PlayerId,
    rules: R,
    clock: C,
    config: SessionConfig,
    log: Log<R::World>,
    cache: StateCache<R::World>,
    smoothing: SmoothingBuffer,
    last_activity_sent: Timestamp,
    last_mouse_sent: Option<Timestamp>,
    deferred_mouse: Option<InputEvent>,
    late_events: u64,
}

impl<R: GameRules, C: Clock> Session<R, C> {
    /// A session for a game that started at `clock` time zero.
    pub fn new(
        player: PlayerId,
        num_players: usize,
        seed: u64,
        rules: R,
        clock: C,
        config: SessionConfig,
    ) -> Result<Self, SessionError> {
        if num_players != rules.num_players() {
            return Err(SessionError::Fault(format!(
                "game has {num_players} players but the rules expect {}",
                rules.num_players()
            )));
        }
        if player.index() >= num_players {
            return Err(SessionError::Fault(format!("player {player} out of range")));
        }
        let log = Log::for_rules(&rules, seed)?;
        Ok(Session {
            player,
            smoothing: SmoothingBuffer::new(config.smoothing_window),
            rules,
            clock,
            config,
            log,
            cache: StateCache::new(),
            last_activity_sent: 0.0,
            last_mouse_sent: None,
            deferred_mouse: None,
            late_events: 0,
        })
    }

    pub fn player(&self) -> PlayerId {
        self.player
    }

    pub fn rules(&self) -> &R {
        &self.rules
    }

    pub fn log(&self) -> &Log<R::World> {
        &self.log
    }

    pub fn smoothing(&self) -> &SmoothingBuffer {
        &self.smoothing
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    pub fn last_activity_sent(&self) -> Timestamp {
        self.last_activity_sent
    }

    /// Remote events that arrived after their own timestamp.
    pub fn late_events(&self) -> u64 {
        self.late_events
    }

    fn stamp(&self) -> Timestamp {
        // Ties are fine; a regressing clock is clamped.
        self.clock.now().max(self.log.latest()[&self.player])
    }

    /// Apply a local event immediately and return the frame announcing it.
    /// Returns `None` when a mouse movement was held back by the rate limit.
    pub fn submit_local(&mut self, event: InputEvent) -> Result<Option<Frame>, SessionError> {
        if let (Some(limit), InputEvent::MouseMovement { .. }) = (self.config.mouse_rate_limit, &event) {
            let now = self.clock.now();
            if self.last_mouse_sent.is_some_and(|last| now - last < 1.0 / limit) {
                self.deferred_mouse = Some(event);
                return Ok(None);
            }
            self.deferred_mouse = None;
        }
        self.send_local(event).map(Some)
    }

    fn send_local(&mut self, event: InputEvent) -> Result<Frame, SessionError> {
        let t = self.stamp();
        if matches!(event, InputEvent::MouseMovement { .. }) {
            self.last_mouse_sent = Some(t);
        }
        self.log.add_event(Message { t, player: self.player, event: event.clone() }, &self.rules)?;
        self.last_activity_sent = t;
        Ok(Frame::input(t, event))
    }

    /// Ingest a frame from the relay.
    pub fn on_frame(&mut self, frame: Frame) -> Result<(), SessionError> {
        match frame {
            Frame::Relayed { t_bits, player, event } => {
                let msg = Message { t: f64::from_bits(t_bits), player, event };
                self.check_remote(player)?;
                let now = self.clock.now();
                if msg.t < now {
                    self.late_events += 1;
                }
                trace!(t = msg.t, %player, now, "remote event");
                self.log.add_event(msg.clone(), &self.rules).map_err(fault)?;
                self.smoothing.note_arrival(msg, now);
                Ok(())
            }
            Frame::RelayedPing { t_bits, player } => {
                self.check_remote(player)?;
                self.log.add_ping(f64::from_bits(t_bits), player, &self.rules).map_err(fault)
            }
            Frame::Error { code, detail } => Err(SessionError::Server { code, detail }),
            other => Err(SessionError::Fault(format!("unexpected {} during a game", other.type_name()))),
        }
    }

    fn check_remote(&self, player: PlayerId) -> Result<(), SessionError> {
        if player == self.player {
            return Err(SessionError::Fault("relay echoed our own frame".into()));
        }
        Ok(())
    }

    /// Housekeeping at every frame: flush a held-back mouse movement and
    /// ping when idle. Returns the frame to send, if any.
    pub fn tick(&mut self) -> Result<Option<Frame>, SessionError> {
        let now = self.clock.now();
        self.smoothing.prune(now);
        if let Some(limit) = self.config.mouse_rate_limit {
            if self.last_mouse_sent.is_none_or(|last| now - last >= 1.0 / limit) {
                if let Some(event) = self.deferred_mouse.take() {
                    return self.send_local(event).map(Some);
                }
            }
        }
        if now - self.last_activity_sent >= self.config.ping_interval {
            let t = self.stamp();
            self.log.add_ping(t, self.player, &self.rules)?;
            self.last_activity_sent = t;
            return Ok(Some(Frame::ping(t)));
        }
        Ok(None)
    }

    /// Authoritative world at the current time.
    pub fn current_state(&mut self) -> Result<R::World, SessionError> {
        let now = self.clock.now();
        Ok(self.cache.current_state(now, &self.log, &self.rules)?)
    }

    /// World to draw: late remote events slide back to their true time.
    pub fn render(&mut self) -> Result<R::World, SessionError> {
        let now = self.clock.now();
        if self.smoothing.settled(now) {
            return Ok(self.cache.current_state(now, &self.log, &self.rules)?);
        }
        Ok(self.smoothing.smoothed_state(now, &self.log, &self.rules)?)
    }

    /// `render` at an explicit time at or after the commit horizon.
    pub fn render_at(&self, now: Timestamp) -> Result<R::World, SessionError> {
        Ok(self.smoothing.smoothed_state(now, &self.log, &self.rules)?)
    }

    pub fn state_at(&self, now: Timestamp) -> Result<R::World, SessionError> {
        Ok(self.log.current_state(now, &self.rules)?)
    }
}

fn fault(e: LogError) -> SessionError {
    match e {
        LogError::OutOfOrder { .. } => SessionError::Fault(format!("peer violated ordering: {e}")),
        other => SessionError::Fault(other.to_string()),
    }
}

impl SessionError {
    /// The relay code this error corresponds to, if it came from the relay.
    pub fn server_code(&self) -> Option<ErrorCode> {
        match self {
            SessionError::Server { code, .. } | SessionError::Rejected { code, .. } => Some(*code),
            _ => None,
        }
    }
}
