//! Virtual-time driver: N sessions talking over simulated links.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use lockstep_core::{GameRules, InputEvent, PlayerId, StateDigest, Timestamp};
use lockstep_protocol::Frame;
use lockstep_session::{ManualClock, Session, SessionConfig};

use crate::net::Link;
use crate::rules::{DotTrace, HashChain, RulesId};
use crate::scenario::Scenario;
use crate::SimError;

/// Rules wrapper that counts `step` invocations.
struct Counted<'a, R> {
    rules: &'a R,
    steps: Cell<u64>,
}

impl<R: GameRules> GameRules for Counted<'_, R> {
    type World = R::World;

    fn num_players(&self) -> usize {
        self.rules.num_players()
    }

    fn start(&self, seed: u64) -> R::World {
        self.rules.start(seed)
    }

    fn step(&self, dt: f64, world: R::World) -> R::World {
        self.steps.set(self.steps.get() + 1);
        self.rules.step(dt, world)
    }

    fn handle(&self, player: PlayerId, event: &InputEvent, world: R::World) -> R::World {
        self.rules.handle(player, event, world)
    }
}

enum Action {
    Input { player: usize, index: usize },
    Deliver { to: usize, frame: Frame },
    Tick,
    Sample(usize),
}

struct Scheduled {
    at: Timestamp,
    seq: u64,
    action: Action,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    /// Reversed so that `BinaryHeap` pops the earliest action first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.at.total_cmp(&self.at).then(other.seq.cmp(&self.seq))
    }
}

#[derive(Default)]
struct Agenda {
    heap: BinaryHeap<Scheduled>,
    seq: u64,
}

impl Agenda {
    fn push(&mut self, at: Timestamp, action: Action) {
        self.seq += 1;
        self.heap.push(Scheduled { at, seq: self.seq, action });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClientDigests {
    /// Authoritative state.
    pub current: u64,
    /// What the client would draw.
    pub smoothed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: Timestamp,
    pub clients: Vec<ClientDigests>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClientStats {
    /// Largest number of uncommitted events ever held.
    pub max_pending: usize,
    /// Calls to the rules' `step`, including rendering.
    pub steps: u64,
    /// Remote events that arrived after their own timestamp, each one a
    /// visible correction in the rendered state.
    pub late_events: u64,
    pub frames_sent: u64,
    pub frames_received: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rules: RulesId,
    pub num_players: usize,
    pub events: usize,
    pub samples: Vec<Sample>,
    /// Time at which every message has been delivered and every smoothing
    /// window has elapsed.
    pub quiescent_at: Timestamp,
    pub finals: Vec<ClientDigests>,
    pub stats: Vec<ClientStats>,
}

impl Report {
    /// All clients agree on the final state.
    pub fn consistent(&self) -> bool {
        self.finals.windows(2).all(|w| w[0].current == w[1].current)
    }

    /// Every client renders exactly its authoritative state at quiescence.
    pub fn smoothing_settled(&self) -> bool {
        self.finals.iter().all(|d| d.current == d.smoothed)
    }

    /// Stable text rendering; equal reports render to equal bytes.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "scenario rules={} players={} events={}", self.rules, self.num_players, self.events);
        for s in &self.samples {
            for (c, d) in s.clients.iter().enumerate() {
                let _ = writeln!(
                    w,
                    "sample t={:?} client={c} current={:016x} smoothed={:016x}",
                    s.t, d.current, d.smoothed
                );
            }
        }
        for (c, st) in self.stats.iter().enumerate() {
            let _ = writeln!(
                w,
                "stats client={c} max_pending={} steps={} late_events={} sent={} received={}",
                st.max_pending, st.steps, st.late_events, st.frames_sent, st.frames_received
            );
        }
        for (c, d) in self.finals.iter().enumerate() {
            let _ = writeln!(
                w,
                "final t={:?} client={c} current={:016x} smoothed={:016x}",
                self.quiescent_at, d.current, d.smoothed
            );
        }
        let _ = writeln!(w, "consistent={} smoothing_settled={}", self.consistent(), self.smoothing_settled());
        out
    }
}

fn relayed(from: usize, frame: &Frame) -> Frame {
    let player = PlayerId(from as u32);
    match *frame {
        Frame::Input { t_bits, ref event } => Frame::Relayed { t_bits, player, event: event.clone() },
        Frame::Ping { t_bits } => Frame::RelayedPing { t_bits, player },
        _ => unreachable!("sessions only emit Input and Ping"),
    }
}

/// Run a scenario with the given rules. The relay is modelled as a direct
/// link between every pair of clients that rewrites `Input`/`Ping` into
/// `Relayed`/`RelayedPing`, with the link latency standing for the full
/// client-relay-client trip.
pub fn run_scenario<R: StateDigest>(sc: &Scenario, rules: &R) -> Result<Report, SimError> {
    sc.validate()?;
    let n = sc.num_players;
    if rules.num_players() != n {
        return Err(SimError::Invalid(format!("rules expect {} players, scenario has {n}", rules.num_players())));
    }
    let clock = ManualClock::new(0.0);
    let config = SessionConfig {
        ping_interval: sc.ping_interval,
        smoothing_window: sc.smoothing_window,
        mouse_rate_limit: None,
    };
    let counted: Vec<Counted<R>> = (0..n).map(|_| Counted { rules, steps: Cell::new(0) }).collect();
    let mut sessions = counted
        .iter()
        .enumerate()
        .map(|(i, c)| Session::new(PlayerId(i as u32), n, sc.seed, c, clock.clone(), config.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| SimError::Fault { client: 0, source })?;
    let mut links: Vec<Vec<Link>> = (0..n).map(|from| (0..n).map(|to| Link::new(sc.net, from, to)).collect()).collect();
    let mut stats = vec![ClientStats::default(); n];

    let mut agenda = Agenda::default();
    for p in 0..n {
        for (index, input) in sc.script(p).iter().enumerate() {
            agenda.push(input.t, Action::Input { player: p, index });
        }
    }
    for (i, t) in sc.samples.iter().enumerate() {
        agenda.push(*t, Action::Sample(i));
    }
    agenda.push(sc.tick, Action::Tick);

    let mut samples = Vec::with_capacity(sc.samples.len());
    let mut now = 0.0;
    while let Some(Scheduled { at, action, .. }) = agenda.heap.pop() {
        now = at;
        clock.set(at);
        let mut outgoing: Vec<(usize, Frame)> = Vec::new();
        match action {
            Action::Input { player, index } => {
                let event = sc.script(player)[index].event.clone();
                let frame = sessions[player]
                    .submit_local(event)
                    .map_err(|source| SimError::Fault { client: player, source })?;
                outgoing.extend(frame.map(|f| (player, f)));
            }
            Action::Deliver { to, frame } => {
                stats[to].frames_received += 1;
                sessions[to].on_frame(frame).map_err(|source| SimError::Fault { client: to, source })?;
            }
            Action::Tick => {
                for (p, s) in sessions.iter_mut().enumerate() {
                    let frame = s.tick().map_err(|source| SimError::Fault { client: p, source })?;
                    outgoing.extend(frame.map(|f| (p, f)));
                }
                let next = at + sc.tick;
                if next < sc.duration {
                    agenda.push(next, Action::Tick);
                }
            }
            Action::Sample(i) => {
                let clients = sessions
                    .iter_mut()
                    .enumerate()
                    .map(|(p, s)| digests(s, rules).map_err(|source| SimError::Fault { client: p, source }))
                    .collect::<Result<_, _>>()?;
                samples.push(Sample { t: sc.samples[i], clients });
            }
        }
        for (from, frame) in outgoing {
            stats[from].frames_sent += 1;
            let frame = relayed(from, &frame);
            for to in (0..n).filter(|&to| to != from) {
                let when = links[from][to].schedule(at);
                agenda.push(when, Action::Deliver { to, frame: frame.clone() });
            }
        }
        for (st, s) in stats.iter_mut().zip(&sessions) {
            st.max_pending = st.max_pending.max(s.log().events().len());
        }
    }

    let quiescent_at = now.max(sc.duration) + sc.smoothing_window;
    clock.set(quiescent_at);
    let finals = sessions
        .iter_mut()
        .enumerate()
        .map(|(p, s)| digests(s, rules).map_err(|source| SimError::Fault { client: p, source }))
        .collect::<Result<Vec<_>, _>>()?;
    samples.sort_by(|a, b| a.t.total_cmp(&b.t));
    for ((st, s), c) in stats.iter_mut().zip(&sessions).zip(&counted) {
        st.steps = c.steps.get();
        st.late_events = s.late_events();
    }
    Ok(Report { rules: sc.rules, num_players: n, events: sc.event_count(), samples, quiescent_at, finals, stats })
}

fn digests<R: StateDigest>(
    s: &mut Session<&Counted<'_, R>, ManualClock>,
    rules: &R,
) -> Result<ClientDigests, lockstep_session::SessionError> {
    let current = rules.digest(&s.current_state()?);
    let smoothed = rules.digest(&s.render()?);
    Ok(ClientDigests { current, smoothed })
}

/// Run a scenario with the built-in rules it names.
pub fn run_builtin(sc: &Scenario) -> Result<Report, SimError> {
    match sc.rules {
        RulesId::HashChain => run_scenario(sc, &HashChain { players: sc.num_players }),
        RulesId::DotTrace => run_scenario(sc, &DotTrace),
    }
}
