//! Order-independence check for the event log: every merge of per-player
//! message streams that keeps each player's own order must produce the same
//! log.

use std::collections::BTreeMap;
use std::fmt;

use lockstep_core::{DetRng, Log, LogError, Message, PlayerId, StateDigest};
use serde::{Deserialize, Serialize};

use crate::rules::{DotTrace, HashChain, RulesId};
use crate::scenario::ScriptedInput;
use crate::SimError;

pub const DEFAULT_CAP: u64 = 100_000;

/// Everything observable about a log, with floats as bit patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogSnapshot {
    pub committed_t: u64,
    pub committed_digest: u64,
    pub events: Vec<(u64, PlayerId, String)>,
    pub latest: BTreeMap<PlayerId, u64>,
}

impl LogSnapshot {
    pub fn of<R: StateDigest>(log: &Log<R::World>, rules: &R) -> Self {
        let (t, world) = log.committed();
        LogSnapshot {
            committed_t: t.to_bits(),
            committed_digest: rules.digest(world),
            events: log.events().iter().map(|m| (m.t.to_bits(), m.player, format!("{:?}", m.event))).collect(),
            latest: log.latest().iter().map(|(p, t)| (*p, t.to_bits())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterleaveError {
    CapExceeded {
        count: Option<u128>,
        cap: u64,
    },
    NotMonotone {
        player: usize,
        index: usize,
    },
    WrongPlayer {
        list: usize,
        index: usize,
        player: PlayerId,
    },
    PlayerCount {
        lists: usize,
        rules: usize,
    },
    Rejected {
        order: Vec<usize>,
        error: LogError,
    },
    /// Two merges disagree. Orders list the player whose next message was
    /// fed at each position.
    Mismatch {
        baseline: Vec<usize>,
        order: Vec<usize>,
        expected: Box<LogSnapshot>,
        got: Box<LogSnapshot>,
    },
}

impl fmt::Display for InterleaveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterleaveError::CapExceeded { count: Some(c), cap } => {
                write!(f, "{c} interleavings exceed the cap of {cap}")
            }
            InterleaveError::CapExceeded { count: None, cap } => write!(f, "interleavings overflow; cap is {cap}"),
            InterleaveError::NotMonotone { player, index } => {
                write!(f, "player {player} message {index} goes back in time")
            }
            InterleaveError::WrongPlayer { list, index, player } => {
                write!(f, "list {list} message {index} claims to be from {player}")
            }
            InterleaveError::PlayerCount { lists, rules } => {
                write!(f, "{lists} message lists for rules with {rules} players")
            }
            InterleaveError::Rejected { order, error } => write!(f, "order {order:?} rejected: {error}"),
            InterleaveError::Mismatch { baseline, order, expected, got } => {
                write!(f, "order {order:?} diverges from {baseline:?}\n  expected {expected:?}\n  got      {got:?}")
            }
        }
    }
}

impl std::error::Error for InterleaveError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterleaveOutcome {
    pub checked: u64,
    pub snapshot: LogSnapshot,
}

/// Number of order-preserving merges of lists with these lengths, or
/// `None` on overflow.
pub fn count_interleavings(lens: &[usize]) -> Option<u128> {
    // Product of binomials C(prefix + len, len), computed incrementally.
    let mut total: u128 = 1;
    let mut placed: u128 = 0;
    for &len in lens {
        for k in 1..=len as u128 {
            placed += 1;
            total = total.checked_mul(placed)? / k;
        }
    }
    Some(total)
}

fn validate<R: StateDigest>(rules: &R, lists: &[Vec<Message>]) -> Result<(), InterleaveError> {
    if lists.len() != rules.num_players() {
        return Err(InterleaveError::PlayerCount { lists: lists.len(), rules: rules.num_players() });
    }
    for (p, list) in lists.iter().enumerate() {
        for (i, m) in list.iter().enumerate() {
            if m.player != PlayerId(p as u32) {
                return Err(InterleaveError::WrongPlayer { list: p, index: i, player: m.player });
            }
            if i > 0 && m.t < list[i - 1].t {
                return Err(InterleaveError::NotMonotone { player: p, index: i });
            }
        }
    }
    Ok(())
}

fn replay<R: StateDigest>(
    rules: &R,
    seed: u64,
    lists: &[Vec<Message>],
    order: &[usize],
) -> Result<LogSnapshot, InterleaveError> {
    let mut log = Log::for_rules(rules, seed).expect("player count validated");
    let mut next = vec![0; lists.len()];
    for &p in order {
        let msg = lists[p][next[p]].clone();
        next[p] += 1;
        log.add_event(msg, rules).map_err(|error| InterleaveError::Rejected { order: order.to_vec(), error })?;
    }
    Ok(LogSnapshot::of(&log, rules))
}

struct Checker<'a, R> {
    rules: &'a R,
    seed: u64,
    lists: &'a [Vec<Message>],
    baseline: Option<(Vec<usize>, LogSnapshot)>,
    checked: u64,
}

impl<R: StateDigest> Checker<'_, R> {
    fn check(&mut self, order: &[usize]) -> Result<(), InterleaveError> {
        let got = replay(self.rules, self.seed, self.lists, order)?;
        self.checked += 1;
        match &self.baseline {
            None => self.baseline = Some((order.to_vec(), got)),
            Some((base, expected)) if *expected != got => {
                return Err(InterleaveError::Mismatch {
                    baseline: base.clone(),
                    order: order.to_vec(),
                    expected: Box::new(expected.clone()),
                    got: Box::new(got),
                });
            }
            Some(_) => {}
        }
        Ok(())
    }

    fn enumerate(&mut self, remaining: &mut [usize], order: &mut Vec<usize>) -> Result<(), InterleaveError> {
        if remaining.iter().all(|&r| r == 0) {
            return self.check(order);
        }
        for p in 0..remaining.len() {
            if remaining[p] > 0 {
                remaining[p] -= 1;
                order.push(p);
                self.enumerate(remaining, order)?;
                order.pop();
                remaining[p] += 1;
            }
        }
        Ok(())
    }

    fn finish(self) -> InterleaveOutcome {
        let snapshot = self.baseline.map(|(_, s)| s).expect("at least one interleaving");
        InterleaveOutcome { checked: self.checked, snapshot }
    }
}

/// Feed every order-preserving merge of `lists` (one list per player, in
/// player order) into a fresh log and require identical results. Refuses
/// when the number of merges exceeds `cap`.
pub fn check_all_interleavings<R: StateDigest>(
    rules: &R,
    seed: u64,
    lists: &[Vec<Message>],
    cap: u64,
) -> Result<InterleaveOutcome, InterleaveError> {
    validate(rules, lists)?;
    let lens: Vec<usize> = lists.iter().map(Vec::len).collect();
    let count = count_interleavings(&lens);
    if count.is_none_or(|c| c > cap as u128) {
        return Err(InterleaveError::CapExceeded { count, cap });
    }
    let mut checker = Checker { rules, seed, lists, baseline: None, checked: 0 };
    let mut remaining = lens;
    checker.enumerate(&mut remaining, &mut Vec::new())?;
    Ok(checker.finish())
}

/// Like [`check_all_interleavings`] but over `trials` uniformly random
/// merges, for inputs too large to enumerate.
pub fn check_random_interleavings<R: StateDigest>(
    rules: &R,
    seed: u64,
    lists: &[Vec<Message>],
    trials: u64,
    rng: &mut DetRng,
) -> Result<InterleaveOutcome, InterleaveError> {
    validate(rules, lists)?;
    let mut checker = Checker { rules, seed, lists, baseline: None, checked: 0 };
    let mut order: Vec<usize> = lists.iter().enumerate().flat_map(|(p, l)| std::iter::repeat_n(p, l.len())).collect();
    for _ in 0..trials.max(1) {
        for i in (1..order.len()).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            order.swap(i, j);
        }
        checker.check(&order)?;
    }
    Ok(checker.finish())
}

/// An interleaving case file: rules, game seed and one message list per
/// player.
///
/// ```toml
/// rules = "hash-chain"
/// seed = 3
/// cap = 100000               # optional
///
/// [[players]]
/// messages = [ { t = 0.5, kind = "KeyPress", key = "a" } ]
///
/// [[players]]
/// messages = [ { t = 0.5, kind = "MouseMovement", at = { x = 1.0, y = 1.0 } } ]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterleaveCase {
    pub rules: RulesId,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub cap: u64,
    pub players: Vec<CasePlayer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasePlayer {
    #[serde(default)]
    pub messages: Vec<ScriptedInput>,
}

fn default_cap() -> u64 {
    DEFAULT_CAP
}

impl InterleaveCase {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))
    }

    pub fn lists(&self) -> Vec<Vec<Message>> {
        self.players
            .iter()
            .enumerate()
            .map(|(p, pl)| pl.messages.iter().map(|m| Message::new(m.t, p as u32, m.event.clone())).collect())
            .collect()
    }

    pub fn run(&self) -> Result<InterleaveOutcome, InterleaveError> {
        let lists = self.lists();
        match self.rules {
            RulesId::HashChain => {
                check_all_interleavings(&HashChain { players: lists.len() }, self.seed, &lists, self.cap)
            }
            RulesId::DotTrace => check_all_interleavings(&DotTrace, self.seed, &lists, self.cap),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lockstep_core::InputEvent;

    fn msgs(p: u32, ts: &[f64]) -> Vec<Message> {
        ts.iter().map(|&t| Message::new(t, p, InputEvent::key_press(format!("{p}@{t}")))).collect()
    }

    #[test]
    fn counts_are_multinomial() {
        assert_eq!(count_interleavings(&[1, 1]), Some(2));
        assert_eq!(count_interleavings(&[3, 3]), Some(20));
        assert_eq!(count_interleavings(&[4, 4]), Some(70));
        assert_eq!(count_interleavings(&[2, 2, 2]), Some(90));
        assert_eq!(count_interleavings(&[]), Some(1));
        assert_eq!(count_interleavings(&[200, 200, 200]), None);
    }

    #[test]
    fn small_cases_pass_and_count() {
        let rules = HashChain { players: 2 };
        let out = check_all_interleavings(&rules, 0, &[msgs(0, &[1.0]), msgs(1, &[2.0])], DEFAULT_CAP).unwrap();
        assert_eq!(out.checked, 2);
        let out =
            check_all_interleavings(&rules, 0, &[msgs(0, &[0.5, 1.0, 3.0]), msgs(1, &[0.5, 2.0, 2.0])], DEFAULT_CAP)
                .unwrap();
        assert_eq!(out.checked, 20);
    }

    #[test]
    fn refuses_above_cap_and_bad_input() {
        let rules = HashChain { players: 2 };
        let lists = [msgs(0, &[1.0, 2.0]), msgs(1, &[1.0, 2.0])];
        assert!(matches!(
            check_all_interleavings(&rules, 0, &lists, 5),
            Err(InterleaveError::CapExceeded { count: Some(6), cap: 5 })
        ));
        let lists = [msgs(0, &[2.0, 1.0]), msgs(1, &[])];
        assert!(matches!(check_all_interleavings(&rules, 0, &lists, 10), Err(InterleaveError::NotMonotone { .. })));
        let lists = [msgs(1, &[1.0]), msgs(1, &[])];
        assert!(matches!(check_all_interleavings(&rules, 0, &lists, 10), Err(InterleaveError::WrongPlayer { .. })));
    }

    #[test]
    fn nondeterministic_rules_are_caught() {
        /// Every fresh game starts from a different world.
        struct Drifting(std::cell::Cell<u64>);
        impl lockstep_core::GameRules for Drifting {
            type World = u64;
            fn num_players(&self) -> usize {
                2
            }
            fn start(&self, _: u64) -> u64 {
                self.0.set(self.0.get() + 1);
                self.0.get()
            }
            fn step(&self, _: f64, w: u64) -> u64 {
                w
            }
            fn handle(&self, _: PlayerId, _: &InputEvent, w: u64) -> u64 {
                w + 1
            }
        }
        impl StateDigest for Drifting {
            fn digest(&self, w: &u64) -> u64 {
                *w
            }
        }
        let err = check_all_interleavings(&Drifting(Default::default()), 0, &[msgs(0, &[1.0]), msgs(1, &[1.5])], 100)
            .unwrap_err();
        assert!(matches!(err, InterleaveError::Mismatch { .. }), "{err}");
    }

    #[test]
    fn random_trials_agree_with_exhaustive() {
        let rules = HashChain { players: 3 };
        let lists = [msgs(0, &[0.1, 0.2, 0.2]), msgs(1, &[0.2, 0.3]), msgs(2, &[0.05, 0.4])];
        let all = check_all_interleavings(&rules, 9, &lists, DEFAULT_CAP).unwrap();
        let some = check_random_interleavings(&rules, 9, &lists, 50, &mut DetRng::new(1)).unwrap();
        assert_eq!(all.snapshot, some.snapshot);
    }

    #[test]
    fn case_files_parse() {
        let case = InterleaveCase::from_toml(
            r#"
rules = "hash-chain"
seed = 3
[[players]]
messages = [ { t = 0.5, kind = "KeyPress", key = "a" } ]
[[players]]
messages = [ { t = 0.5, kind = "MouseMovement", at = { x = 1.0, y = 1.0 } } ]
"#,
        )
        .unwrap();
        assert_eq!(case.cap, DEFAULT_CAP);
        assert_eq!(case.run().unwrap().checked, 2);
    }
}
