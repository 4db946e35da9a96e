//! Game rules used by scenarios and tests.

use std::fmt;
use std::hash::Hasher;
use std::str::FromStr;

use fnv::FnvHasher;
use lockstep_core::{det_cos, det_exp, det_sin, DetRng, GameRules, InputEvent, PlayerId, StateDigest};
use serde::{Deserialize, Serialize};

/// Stable 64-bit digest builder over raw bit patterns.
#[derive(Default)]
pub struct Digest(FnvHasher);

impl Digest {
    pub fn u64(mut self, x: u64) -> Self {
        self.0.write_u64(x);
        self
    }

    pub fn f64(self, x: f64) -> Self {
        self.u64(x.to_bits())
    }

    pub fn bytes(mut self, b: &[u8]) -> Self {
        self.0.write_usize(b.len());
        self.0.write(b);
        self
    }

    pub fn finish(&self) -> u64 {
        self.0.finish()
    }
}

fn event_digest(d: Digest, e: &InputEvent) -> Digest {
    match e {
        InputEvent::KeyPress { key } => d.u64(1).bytes(key.as_bytes()),
        InputEvent::KeyRelease { key } => d.u64(2).bytes(key.as_bytes()),
        InputEvent::MousePress { button, at } => d.u64(3).u64(*button as u64).f64(at.x).f64(at.y),
        InputEvent::MouseRelease { button, at } => d.u64(4).u64(*button as u64).f64(at.x).f64(at.y),
        InputEvent::MouseMovement { at } => d.u64(5).f64(at.x).f64(at.y),
    }
}

/// Order- and timing-sensitive rules: every event is chained into a hash
/// together with a float accumulator that integrates elapsed time, so any
/// difference in event order, handling time or step boundaries changes the
/// digest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashChain {
    pub players: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainWorld {
    pub hash: u64,
    pub clock: f64,
    pub handled: u64,
}

impl GameRules for HashChain {
    type World = ChainWorld;

    fn num_players(&self) -> usize {
        self.players
    }

    fn start(&self, seed: u64) -> ChainWorld {
        ChainWorld { hash: DetRng::new(seed).next_u64(), clock: 0.0, handled: 0 }
    }

    fn step(&self, dt: f64, mut w: ChainWorld) -> ChainWorld {
        w.clock = w.clock * 0.999 + dt;
        w
    }

    fn handle(&self, player: PlayerId, event: &InputEvent, mut w: ChainWorld) -> ChainWorld {
        let d = Digest::default().u64(w.hash).u64(player.0 as u64).f64(w.clock);
        w.hash = event_digest(d, event).finish();
        w.handled += 1;
        w
    }
}

impl StateDigest for HashChain {
    fn digest(&self, w: &ChainWorld) -> u64 {
        Digest::default().u64(w.hash).f64(w.clock).u64(w.handled).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    Red,
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dot {
    pub color: Color,
    pub radius: f64,
    pub x: f64,
    pub y: f64,
}

/// Two players leave trails of dots at their cursor positions; dots shrink
/// exponentially and vanish below radius 0.1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DotTrace;

impl GameRules for DotTrace {
    type World = Vec<Dot>;

    fn num_players(&self) -> usize {
        2
    }

    fn start(&self, _seed: u64) -> Vec<Dot> {
        Vec::new()
    }

    fn step(&self, dt: f64, dots: Vec<Dot>) -> Vec<Dot> {
        let decay = det_exp(-dt);
        dots.into_iter().map(|d| Dot { radius: d.radius * decay, ..d }).filter(|d| d.radius >= 0.1).collect()
    }

    fn handle(&self, player: PlayerId, event: &InputEvent, mut dots: Vec<Dot>) -> Vec<Dot> {
        let color = match player.0 {
            0 => Color::Red,
            1 => Color::Green,
            _ => return dots,
        };
        if let InputEvent::MouseMovement { at } = event {
            dots.insert(0, Dot { color, radius: 1.0, x: at.x, y: at.y });
        }
        dots
    }
}

impl StateDigest for DotTrace {
    fn digest(&self, dots: &Vec<Dot>) -> u64 {
        dots.iter()
            .fold(Digest::default().u64(dots.len() as u64), |d, dot| {
                d.u64(dot.color as u64).f64(dot.radius).f64(dot.x).f64(dot.y)
            })
            .finish()
    }
}

/// Euler substeps per call to `step`.
const PENDULUM_SUBSTEPS: u32 = 16;
const GRAVITY: f64 = 9.81;

/// Frictionless double pendulum with unit masses and unit arms, integrated
/// by explicit Euler. Input is ignored; the state is fully determined by the
/// seed-independent initial angles. `det_math` selects the deterministic
/// trigonometry instead of the platform's.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pendulum {
    pub det_math: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub theta1: f64,
    pub theta2: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl Pendulum {
    fn sin(&self, x: f64) -> f64 {
        if self.det_math {
            det_sin(x)
        } else {
            x.sin()
        }
    }

    fn cos(&self, x: f64) -> f64 {
        if self.det_math {
            det_cos(x)
        } else {
            x.cos()
        }
    }

    /// Angular accelerations for unit masses and arm lengths.
    fn accel(&self, s: &PendulumState) -> (f64, f64) {
        let (t1, t2, w1, w2) = (s.theta1, s.theta2, s.omega1, s.omega2);
        let d = t1 - t2;
        let (sd, cd) = (self.sin(d), self.cos(d));
        let den = 3.0 - self.cos(2.0 * d);
        let a1 =
            (-3.0 * GRAVITY * self.sin(t1) - GRAVITY * self.sin(t1 - 2.0 * t2) - 2.0 * sd * (w2 * w2 + w1 * w1 * cd))
                / den;
        let a2 = 2.0 * sd * (2.0 * w1 * w1 + 2.0 * GRAVITY * self.cos(t1) + w2 * w2 * cd) / den;
        (a1, a2)
    }
}

impl GameRules for Pendulum {
    type World = PendulumState;

    fn num_players(&self) -> usize {
        1
    }

    fn start(&self, _seed: u64) -> PendulumState {
        PendulumState { theta1: 2.0, theta2: 1.0, omega1: 0.0, omega2: 0.0 }
    }

    fn step(&self, dt: f64, mut s: PendulumState) -> PendulumState {
        let h = dt / PENDULUM_SUBSTEPS as f64;
        for _ in 0..PENDULUM_SUBSTEPS {
            let (a1, a2) = self.accel(&s);
            s = PendulumState {
                theta1: s.theta1 + h * s.omega1,
                theta2: s.theta2 + h * s.omega2,
                omega1: s.omega1 + h * a1,
                omega2: s.omega2 + h * a2,
            };
        }
        s
    }

    fn handle(&self, _player: PlayerId, _event: &InputEvent, s: PendulumState) -> PendulumState {
        s
    }
}

impl StateDigest for Pendulum {
    fn digest(&self, s: &PendulumState) -> u64 {
        Digest::default().f64(s.theta1).f64(s.theta2).f64(s.omega1).f64(s.omega2).finish()
    }
}

/// Names of the rules a scenario file can ask for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RulesId {
    HashChain,
    DotTrace,
}

impl RulesId {
    pub fn as_str(self) -> &'static str {
        match self {
            RulesId::HashChain => "hash-chain",
            RulesId::DotTrace => "dot-trace",
        }
    }
}

impl fmt::Display for RulesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RulesId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hash-chain" => Ok(RulesId::HashChain),
            "dot-trace" => Ok(RulesId::DotTrace),
            _ => Err(format!("unknown rules {s:?}; expected hash-chain or dot-trace")),
        }
    }
}
