//! Deterministic multi-client simulator for the lockstep engine.
//!
//! Everything runs single-threaded in virtual time: scripted players drive
//! real [`lockstep_session::Session`]s over simulated links, and the
//! resulting [`Report`] records state digests per client. Running the same
//! scenario twice yields a byte-identical report.

pub mod harness;
pub mod interleave;
pub mod net;
pub mod rules;
pub mod scenario;

use lockstep_core::{Log, StateDigest, GAME_RATE};
use lockstep_session::SessionError;
use thiserror::Error;

pub use harness::{run_builtin, run_scenario, ClientDigests, ClientStats, Report, Sample};
pub use interleave::{
    check_all_interleavings, check_random_interleavings, count_interleavings, InterleaveCase, InterleaveError,
    InterleaveOutcome, LogSnapshot, DEFAULT_CAP,
};
pub use net::{Link, NetModel};
pub use rules::{Digest, DotTrace, HashChain, Pendulum, RulesId};
pub use scenario::{random_scenario, silent_player_scenario, PlayerScript, Scenario, ScriptedInput};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot parse: {0}")]
    Parse(String),
    #[error("client {client} failed: {source}")]
    Fault { client: usize, source: SessionError },
}

/// Run two independent engines with identical double-pendulum rules for
/// `steps` calls to `step` and return both final-state digests.
pub fn double_pendulum_scenario(steps: u32, use_det_math: bool) -> (u64, u64) {
    let run = || {
        let rules = Pendulum { det_math: use_det_math };
        let log = Log::for_rules(&rules, 0).expect("one player");
        let world = log.current_state(f64::from(steps) * GAME_RATE, &rules).expect("horizon is zero");
        rules.digest(&world)
    };
    (run(), run())
}
