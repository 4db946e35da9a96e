use crate::types::{InputEvent, PlayerId};

/// The application's game logic.
///
/// Every function must be deterministic across platforms: equal inputs give
/// bit-identical outputs. Use the functions in [`crate::det`] instead of the
/// platform's transcendental functions, and draw randomness only from the
/// seed passed to [`GameRules::start`].
pub trait GameRules {
    type World: Clone;

    fn num_players(&self) -> usize;

    fn start(&self, seed: u64) -> Self::World;

    /// Advance the world by `dt` seconds; `dt` never exceeds [`crate::GAME_RATE`].
    fn step(&self, dt: f64, world: Self::World) -> Self::World;

    fn handle(&self, player: PlayerId, event: &InputEvent, world: Self::World) -> Self::World;
}

/// Fingerprint of a world, used by tests and the simulation harness to
/// compare replicas. The engine itself never looks inside a world.
pub trait StateDigest: GameRules {
    fn digest(&self, world: &Self::World) -> u64;
}

impl<R: GameRules + ?Sized> GameRules for &R {
    type World = R::World;

    fn num_players(&self) -> usize {
        (**self).num_players()
    }

    fn start(&self, seed: u64) -> Self::World {
        (**self).start(seed)
    }

    fn step(&self, dt: f64, world: Self::World) -> Self::World {
        (**self).step(dt, world)
    }

    fn handle(&self, player: PlayerId, event: &InputEvent, world: Self::World) -> Self::World {
        (**self).handle(player, event, world)
    }
}

impl<R: StateDigest + ?Sized> StateDigest for &R {
    fn digest(&self, world: &Self::World) -> u64 {
        (**self).digest(world)
    }
}
