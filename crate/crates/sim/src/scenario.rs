//! Scenario files: who presses what, when, over which network.
//!
//! Scenarios are TOML documents:
//!
//! ```toml
//! rules = "dot-trace"        # or "hash-chain"
//! num_players = 2
//! duration = 4.0             # seconds of scripted play
//! ping_interval = 1.0        # optional, default 1.0
//! smoothing_window = 0.25    # optional, default 0.25
//! tick = 0.03125             # optional client frame interval, default 1/32
//! seed = 7                   # optional game seed, default 0
//! samples = [1.0, 2.0, 3.0]  # optional digest snapshot times
//! net = { kind = "fixed", latency = 0.1 }
//! # net = { kind = "jitter", min = 0.02, max = 0.25, seed = 1 }
//!
//! [[players]]                # player 0; missing players stay silent
//! inputs = [
//!   { t = 0.5, kind = "MouseMovement", at = { x = 1.0, y = 2.0 } },
//!   { t = 0.75, kind = "KeyPress", key = "a" },
//! ]
//! ```

use lockstep_core::{DetRng, InputEvent, Timestamp};
use serde::{Deserialize, Serialize};

use crate::net::NetModel;
use crate::rules::RulesId;
use crate::SimError;

fn default_ping_interval() -> f64 {
    1.0
}

fn default_window() -> f64 {
    lockstep_core::DEFAULT_WINDOW
}

fn default_tick() -> f64 {
    1.0 / 32.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedInput {
    /// Virtual time at which the player produces the event.
    pub t: Timestamp,
    #[serde(flatten)]
    pub event: InputEvent,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerScript {
    #[serde(default)]
    pub inputs: Vec<ScriptedInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub rules: RulesId,
    pub num_players: usize,
    pub duration: f64,
    #[serde(default = "default_ping_interval")]
    pub ping_interval: f64,
    #[serde(default = "default_window")]
    pub smoothing_window: f64,
    #[serde(default = "default_tick")]
    pub tick: f64,
    #[serde(default)]
    pub seed: u64,
    pub net: NetModel,
    #[serde(default)]
    pub samples: Vec<Timestamp>,
    #[serde(default)]
    pub players: Vec<PlayerScript>,
}

impl Scenario {
    /// A scenario with no inputs and default timing.
    pub fn new(rules: RulesId, num_players: usize, duration: f64, net: NetModel) -> Self {
        Scenario {
            rules,
            num_players,
            duration,
            ping_interval: default_ping_interval(),
            smoothing_window: default_window(),
            tick: default_tick(),
            seed: 0,
            net,
            samples: Vec::new(),
            players: vec![PlayerScript::default(); num_players],
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }

    pub fn script(&self, player: usize) -> &[ScriptedInput] {
        self.players.get(player).map_or(&[], |p| &p.inputs)
    }

    pub fn event_count(&self) -> usize {
        self.players.iter().map(|p| p.inputs.len()).sum()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let invalid = |msg: String| Err(SimError::Invalid(msg));
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(1..=u8::MAX as usize).contains(&self.num_players) {
            return invalid(format!("num_players must be 1..=255, got {}", self.num_players));
        }
        if self.rules == RulesId::DotTrace && self.num_players != 2 {
            return invalid("dot-trace is a two-player game".into());
        }
        for (name, x) in [
            ("duration", self.duration),
            ("ping_interval", self.ping_interval),
            ("smoothing_window", self.smoothing_window),
            ("tick", self.tick),
        ] {
            if !positive(x) {
                return invalid(format!("{name} must be positive and finite, got {x}"));
            }
        }
        self.net.validate().map_err(SimError::Invalid)?;
        if self.players.len() > self.num_players {
            return invalid(format!("{} scripts for {} players", self.players.len(), self.num_players));
        }
        for (p, script) in self.players.iter().enumerate() {
            let mut prev = 0.0;
            for (i, input) in script.inputs.iter().enumerate() {
                if !(input.t >= prev && input.t < self.duration) {
                    return invalid(format!(
                        "player {p} input {i} at t={} must be non-decreasing and within [0, {})",
                        input.t, self.duration
                    ));
                }
                if !input.event.is_valid() {
                    return invalid(format!("player {p} input {i} is not a valid event"));
                }
                prev = input.t;
            }
        }
        if let Some(t) = self.samples.iter().find(|t| !(**t >= 0.0 && **t <= self.duration)) {
            return invalid(format!("sample time {t} outside [0, {}]", self.duration));
        }
        Ok(())
    }
}

/// Random scripted play: `events` inputs spread over all players at uniform
/// random times, plus ten evenly spaced sample points.
pub fn random_scenario(
    rules: RulesId,
    num_players: usize,
    events: usize,
    duration: f64,
    net: NetModel,
    seed: u64,
) -> Scenario {
    let mut rng = DetRng::new(seed);
    let mut sc = Scenario::new(rules, num_players, duration, net);
    sc.seed = rng.next_u64();
    for _ in 0..events {
        let p = rng.below(num_players as u64) as usize;
        // Quantize so equal timestamps across players actually happen.
        let t = (rng.range(0.0, duration) * 64.0).floor() / 64.0;
        let event = match rng.below(4) {
            0 => InputEvent::key_press(format!("k{}", rng.below(8))),
            _ => InputEvent::mouse_movement(rng.range(0.0, 80.0), rng.range(0.0, 24.0)),
        };
        sc.players[p].inputs.push(ScriptedInput { t, event });
    }
    for script in &mut sc.players {
        script.inputs.sort_by(|a, b| a.t.total_cmp(&b.t));
    }
    sc.samples = (1..=10).map(|i| duration * i as f64 / 10.0).collect();
    sc
}

/// Two players over a 0.1 s link: player 0 never acts and only pings,
/// player 1 moves the mouse 30 times a second for 60 seconds.
pub fn silent_player_scenario() -> Scenario {
    let duration = 60.0;
    let mut sc = Scenario::new(RulesId::DotTrace, 2, duration, NetModel::fixed(0.1));
    sc.players[1].inputs = (0..(duration as usize * 30))
        .map(|i| {
            let t = i as f64 / 30.0;
            ScriptedInput { t, event: InputEvent::mouse_movement(t, (t * 3.0) % 24.0) }
        })
        .collect();
    sc.samples = (1..=60).map(f64::from).collect();
    sc
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
rules = "dot-trace"
num_players = 2
duration = 4.0
samples = [1.0, 2.0]
net = { kind = "jitter", min = 0.02, max = 0.25, seed = 1 }

[[players]]
inputs = [
  { t = 0.5, kind = "MouseMovement", at = { x = 1.0, y = 2.0 } },
  { t = 0.75, kind = "KeyPress", key = "a" },
]
"#;

    #[test]
    fn parses_documented_format() {
        let sc = Scenario::from_toml(EXAMPLE).unwrap();
        assert_eq!(sc.rules, RulesId::DotTrace);
        assert_eq!(sc.ping_interval, 1.0);
        assert_eq!(sc.script(0)[0].event, InputEvent::mouse_movement(1.0, 2.0));
        assert_eq!(sc.script(1), &[]);
        assert_eq!(sc.net, NetModel::Jitter { min: 0.02, max: 0.25, seed: 1 });
        assert_eq!(Scenario::from_toml(&sc.to_toml()).unwrap(), sc);
    }

    #[test]
    fn rejects_bad_scripts() {
        let mut sc = Scenario::from_toml(EXAMPLE).unwrap();
        sc.players[0].inputs[1].t = 0.1;
        assert!(sc.validate().is_err());
        sc.players[0].inputs[1].t = 4.0;
        assert!(sc.validate().is_err());
        let mut sc = Scenario::from_toml(EXAMPLE).unwrap();
        sc.num_players = 3;
        assert!(sc.validate().is_err());
        assert!(Scenario::from_toml("rules = \"dot-trace\"").is_err());
    }

    #[test]
    fn random_scenarios_are_valid_and_reproducible() {
        for seed in 0..20 {
            let sc = random_scenario(RulesId::HashChain, 3, 120, 5.0, NetModel::fixed(0.1), seed);
            sc.validate().unwrap();
            assert_eq!(sc.event_count(), 120);
            assert_eq!(sc, random_scenario(RulesId::HashChain, 3, 120, 5.0, NetModel::fixed(0.1), seed));
        }
        silent_player_scenario().validate().unwrap();
    }
}
