//! The replicated input log.
//!
//! A [`Log`] holds a committed snapshot of the world, the events that are
//! still pending because some player might yet send an earlier one, and the
//! latest activity time seen from every player. The minimum of those times is
//! the commit horizon: no message can ever arrive with a smaller timestamp,
//! so everything strictly before it is final and folded into the snapshot.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::error::LogError;
use crate::rules::GameRules;
use crate::types::{check_timestamp, compare_keys, Message, PlayerId, Timestamp};

/// Largest time step ever passed to [`GameRules::step`].
pub const GAME_RATE: f64 = 1.0 / 16.0;

static NEXT_REVISION: AtomicU64 = AtomicU64::new(1);

fn fresh_revision() -> u64 {
    NEXT_REVISION.fetch_add(1, AtomicOrdering::Relaxed)
}

/// Stable sort by `(t, player)`; messages with equal keys keep their input
/// order.
pub fn sort_messages(mut msgs: Vec<Message>) -> Vec<Message> {
    msgs.sort_by(|a, b| compare_keys(a.key(), b.key()));
    msgs
}

/// Advance `world` by `dt` seconds in chunks of at most [`GAME_RATE`].
pub fn game_step<R: GameRules>(rules: &R, dt: f64, mut world: R::World) -> R::World {
    let mut remaining = dt;
    while remaining > GAME_RATE {
        world = rules.step(GAME_RATE, world);
        remaining -= GAME_RATE;
    }
    if remaining > 0.0 {
        world = rules.step(remaining, world);
    }
    world
}

/// Left fold of `msgs` onto `basis`: step the world across each gap, then
/// hand it the event. Returns the timestamp of the last message applied.
pub fn apply_events<'a, R, I>(rules: &R, msgs: I, basis: (Timestamp, R::World)) -> (Timestamp, R::World)
where
    R: GameRules,
    I: IntoIterator<Item = &'a Message>,
{
    msgs.into_iter().fold(basis, |(t0, world), msg| {
        debug_assert!(msg.t >= t0, "events applied out of order");
        let world = game_step(rules, msg.t - t0, world);
        (msg.t, rules.handle(msg.player, &msg.event, world))
    })
}

#[derive(Debug, Clone)]
pub struct Log<W> {
    committed_t: Timestamp,
    committed: W,
    events: Vec<Message>,
    latest: BTreeMap<PlayerId, Timestamp>,
    revision: u64,
}

impl<W: Clone> Log<W> {
    /// Fresh log at time zero with every player's activity at zero.
    pub fn new<R>(players: &[PlayerId], rules: &R, seed: u64) -> Result<Self, LogError>
    where
        R: GameRules<World = W>,
    {
        if players.is_empty() {
            return Err(LogError::InvalidArgument("no players".into()));
        }
        let mut latest = BTreeMap::new();
        for &p in players {
            if latest.insert(p, 0.0).is_some() {
                return Err(LogError::InvalidArgument(format!("duplicate player {p}")));
            }
        }
        Ok(Log {
            committed_t: 0.0,
            committed: rules.start(seed),
            events: Vec::new(),
            latest,
            revision: fresh_revision(),
        })
    }

    /// Players `0..rules.num_players()`.
    pub fn for_rules<R>(rules: &R, seed: u64) -> Result<Self, LogError>
    where
        R: GameRules<World = W>,
    {
        let players: Vec<PlayerId> = (0..rules.num_players() as u32).map(PlayerId).collect();
        Self::new(&players, rules, seed)
    }

    pub fn committed(&self) -> (Timestamp, &W) {
        (self.committed_t, &self.committed)
    }

    /// Pending events, sorted by `(t, player)`.
    pub fn events(&self) -> &[Message] {
        &self.events
    }

    pub fn latest(&self) -> &BTreeMap<PlayerId, Timestamp> {
        &self.latest
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.latest.keys().copied()
    }

    /// Changes on every successful mutation and is unique across all logs in
    /// the process.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn commit_horizon(&self) -> Timestamp {
        self.latest.values().copied().fold(f64::INFINITY, f64::min)
    }

    /// Insert an event and record the sender's activity. On error the log is
    /// left untouched.
    pub fn add_event<R>(&mut self, msg: Message, rules: &R) -> Result<(), LogError>
    where
        R: GameRules<World = W>,
    {
        msg.validate()?;
        self.check_activity(msg.t, msg.player)?;
        // Upper bound keeps equal keys in arrival order.
        let at = self.events.partition_point(|m| compare_keys(m.key(), msg.key()).is_le());
        let (t, p) = (msg.t, msg.player);
        self.events.insert(at, msg);
        self.record_activity(t, p, rules);
        Ok(())
    }

    /// Record that `player` has been active up to `t` without an event.
    pub fn add_ping<R>(&mut self, t: Timestamp, player: PlayerId, rules: &R) -> Result<(), LogError>
    where
        R: GameRules<World = W>,
    {
        check_timestamp(t)?;
        self.check_activity(t, player)?;
        self.record_activity(t, player, rules);
        Ok(())
    }

    fn check_activity(&self, t: Timestamp, player: PlayerId) -> Result<(), LogError> {
        let latest = *self.latest.get(&player).ok_or(LogError::UnknownPlayer(player))?;
        if t < latest {
            return Err(LogError::OutOfOrder { player, t, latest });
        }
        Ok(())
    }

    fn record_activity<R>(&mut self, t: Timestamp, player: PlayerId, rules: &R)
    where
        R: GameRules<World = W>,
    {
        self.latest.insert(player, t);
        self.revision = fresh_revision();
        self.advance_committed(rules);
    }

    fn advance_committed<R>(&mut self, rules: &R)
    where
        R: GameRules<World = W>,
    {
        let horizon = self.commit_horizon();
        let n = self.events.partition_point(|m| m.t < horizon);
        if n == 0 {
            return;
        }
        let world = self.committed.clone();
        let (t, world) = apply_events(rules, &self.events[..n], (self.committed_t, world));
        self.committed_t = t;
        self.committed = world;
        self.events.drain(..n);
    }

    pub(crate) fn check_query(&self, now: Timestamp) -> Result<(), LogError> {
        check_timestamp(now)?;
        let horizon = self.commit_horizon();
        if now < horizon {
            return Err(LogError::QueryInPast { now, horizon });
        }
        Ok(())
    }

    /// Number of pending events with `t <= now`.
    pub(crate) fn due(&self, now: Timestamp) -> usize {
        self.events.partition_point(|m| m.t <= now)
    }

    /// The world as of `now`: pending events up to `now` replayed on the
    /// committed snapshot, then stepped forward to `now`.
    pub fn current_state<R>(&self, now: Timestamp, rules: &R) -> Result<W, LogError>
    where
        R: GameRules<World = W>,
    {
        self.check_query(now)?;
        let due = &self.events[..self.due(now)];
        let (t, world) = apply_events(rules, due, (self.committed_t, self.committed.clone()));
        Ok(game_step(rules, now - t, world))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::InputEvent;
    use std::cell::RefCell;

    /// Records every call so tests can reason about exactly what ran.
    #[derive(Default)]
    struct Trace {
        calls: RefCell<Vec<String>>,
    }

    impl GameRules for Trace {
        type World = Vec<String>;

        fn num_players(&self) -> usize {
            2
        }

        fn start(&self, seed: u64) -> Vec<String> {
            vec![format!("start {seed}")]
        }

        fn step(&self, dt: f64, mut w: Vec<String>) -> Vec<String> {
            self.calls.borrow_mut().push(format!("step {dt}"));
            w.push(format!("step {dt}"));
            w
        }

        fn handle(&self, p: PlayerId, e: &InputEvent, mut w: Vec<String>) -> Vec<String> {
            self.calls.borrow_mut().push("handle".into());
            w.push(format!("{p} {e:?}"));
            w
        }
    }

    fn key(k: &str) -> InputEvent {
        InputEvent::key_press(k)
    }

    fn players(ids: &[u32]) -> Vec<PlayerId> {
        ids.iter().copied().map(PlayerId).collect()
    }

    #[test]
    fn init_log_starts_at_zero() {
        let rules = Trace::default();
        let log = Log::new(&players(&[0, 1]), &rules, 7).unwrap();
        assert_eq!(log.committed(), (0.0, &vec!["start 7".to_string()]));
        assert!(log.events().is_empty());
        assert_eq!(log.latest().len(), 2);
        assert!(log.latest().values().all(|&t| t == 0.0));

        let single = Log::new(&players(&[0]), &rules, 7).unwrap();
        assert_eq!(single.latest().len(), 1);
    }

    #[test]
    fn init_log_rejects_bad_player_lists() {
        let rules = Trace::default();
        assert!(matches!(Log::new(&[], &rules, 0), Err(LogError::InvalidArgument(_))));
        assert!(matches!(Log::new(&players(&[0, 0]), &rules, 0), Err(LogError::InvalidArgument(_))));
    }

    #[test]
    fn sort_is_stable_by_time_then_player() {
        let m = |t, p, k: &str| Message::new(t, p, key(k));
        assert_eq!(sort_messages(vec![m(2.0, 1, "A"), m(1.0, 0, "B")]), vec![m(1.0, 0, "B"), m(2.0, 1, "A")]);
        assert_eq!(sort_messages(vec![m(1.0, 1, "A"), m(1.0, 0, "B")]), vec![m(1.0, 0, "B"), m(1.0, 1, "A")]);
        assert_eq!(sort_messages(vec![m(1.0, 0, "A"), m(1.0, 0, "B")]), vec![m(1.0, 0, "A"), m(1.0, 0, "B")]);
    }

    #[test]
    fn add_event_commits_strictly_below_horizon() {
        let rules = Trace::default();
        let mut log = Log::new(&players(&[0, 1]), &rules, 0).unwrap();

        log.add_event(Message::new(1.0, 0, key("a")), &rules).unwrap();
        assert_eq!(log.events().len(), 1);
        assert_eq!(log.latest()[&PlayerId(0)], 1.0);
        assert_eq!(log.latest()[&PlayerId(1)], 0.0);
        assert_eq!(log.committed().0, 0.0);

        // horizon 1.0: the t=1.0 event is not strictly below it
        log.add_event(Message::new(2.0, 1, key("b")), &rules).unwrap();
        assert_eq!(log.commit_horizon(), 1.0);
        assert_eq!(log.committed().0, 0.0);
        assert_eq!(log.events().len(), 2);

        log.add_ping(2.5, PlayerId(0), &rules).unwrap();
        assert_eq!(log.commit_horizon(), 2.0);
        assert_eq!(log.committed().0, 1.0);
        assert_eq!(log.events(), &[Message::new(2.0, 1, key("b"))]);
    }

    #[test]
    fn add_event_rejects_regression_and_unknown_players() {
        let rules = Trace::default();
        let mut log = Log::new(&players(&[0, 1]), &rules, 0).unwrap();
        log.add_event(Message::new(1.0, 0, key("a")), &rules).unwrap();
        let rev = log.revision();
        let err = log.add_event(Message::new(0.5, 0, key("x")), &rules).unwrap_err();
        assert!(matches!(err, LogError::OutOfOrder { .. }));
        assert_eq!(log.events().len(), 1);
        assert_eq!(log.revision(), rev);

        assert_eq!(log.add_event(Message::new(3.0, 5, key("x")), &rules), Err(LogError::UnknownPlayer(PlayerId(5))));
        assert!(matches!(
            log.add_event(Message::new(f64::NAN, 1, key("x")), &rules),
            Err(LogError::InvalidArgument(_))
        ));
        assert!(matches!(log.add_ping(f64::INFINITY, PlayerId(1), &rules), Err(LogError::InvalidArgument(_))));
    }

    #[test]
    fn add_ping_semantics() {
        let rules = Trace::default();
        let mut log = Log::new(&players(&[0, 1]), &rules, 0).unwrap();
        log.add_ping(0.0, PlayerId(1), &rules).unwrap();
        assert_eq!(log.commit_horizon(), 0.0);

        log.add_event(Message::new(1.0, 0, key("a")), &rules).unwrap();
        log.add_ping(1.5, PlayerId(1), &rules).unwrap();
        assert_eq!(log.commit_horizon(), 1.0);
        assert_eq!(log.events().len(), 1);
        log.add_ping(3.0, PlayerId(1), &rules).unwrap();
        assert_eq!(log.events().len(), 1, "player 0 is still at 1.0");
        log.add_ping(1.5, PlayerId(0), &rules).unwrap();
        assert!(log.events().is_empty());
        assert_eq!(log.committed().0, 1.0);

        assert!(matches!(log.add_ping(1.0, PlayerId(1), &rules), Err(LogError::OutOfOrder { .. })));
        // equal timestamps are allowed
        log.add_ping(3.0, PlayerId(1), &rules).unwrap();
    }

    #[test]
    fn game_step_chops_at_rate() {
        let rules = Trace::default();
        game_step(&rules, 0.0, vec![]);
        game_step(&rules, -1.0, vec![]);
        assert!(rules.calls.borrow().is_empty());

        game_step(&rules, 1.0 / 32.0, vec![]);
        assert_eq!(*rules.calls.borrow(), vec!["step 0.03125"]);
        rules.calls.borrow_mut().clear();

        game_step(&rules, 5.0 / 32.0, vec![]);
        assert_eq!(*rules.calls.borrow(), vec!["step 0.0625", "step 0.0625", "step 0.03125"]);
    }

    #[test]
    fn apply_events_folds_in_order() {
        let rules = Trace::default();
        let (t, w) = apply_events(&rules, &[], (5.0, vec![]));
        assert_eq!((t, w.len()), (5.0, 0));

        let msg = Message::new(5.0, 1, key("z"));
        let (t, w) = apply_events(&rules, [&msg], (5.0, vec![]));
        assert_eq!(t, 5.0);
        assert_eq!(w, vec![format!("P1 {:?}", key("z"))]);
    }

    #[test]
    fn current_state_guards_the_past() {
        let rules = Trace::default();
        let mut log = Log::new(&players(&[0, 1]), &rules, 3).unwrap();
        assert_eq!(log.current_state(0.0, &rules).unwrap(), vec!["start 3"]);
        log.add_ping(2.0, PlayerId(0), &rules).unwrap();
        log.add_ping(2.0, PlayerId(1), &rules).unwrap();
        assert!(matches!(log.current_state(1.0, &rules), Err(LogError::QueryInPast { .. })));
        assert!(log.current_state(2.0, &rules).is_ok());
    }

    #[test]
    fn current_state_ignores_future_events() {
        let rules = Trace::default();
        let mut log = Log::new(&players(&[0, 1]), &rules, 0).unwrap();
        log.add_event(Message::new(3.0, 1, key("late")), &rules).unwrap();
        let w = log.current_state(1.0, &rules).unwrap();
        assert!(w.iter().all(|s| !s.contains("late")));
        let w = log.current_state(3.0, &rules).unwrap();
        assert!(w.last().unwrap().contains("late"));
    }
}
