use lockstep_core::DetRng;
use serde::{Deserialize, Serialize};

/// Latency model applied to every directed link between two clients.
/// Delivery is reliable and FIFO per link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NetModel {
    Fixed {
        latency: f64,
    },
    /// Uniform latency in `[min, max]`, drawn from a per-link stream
    /// derived from `seed`.
    Jitter {
        min: f64,
        max: f64,
        seed: u64,
    },
}

impl NetModel {
    pub fn fixed(latency: f64) -> Self {
        NetModel::Fixed { latency }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        match *self {
            NetModel::Fixed { latency } if ok(latency) => Ok(()),
            NetModel::Jitter { min, max, .. } if ok(min) && ok(max) && min <= max => Ok(()),
            other => Err(format!("invalid latency model {other:?}")),
        }
    }

    /// Upper bound on the latency of a single message.
    pub fn max_latency(&self) -> f64 {
        match *self {
            NetModel::Fixed { latency } => latency,
            NetModel::Jitter { max, .. } => max,
        }
    }
}

/// One directed link. Deliveries never overtake each other: a message is
/// delivered no earlier than the one sent before it on the same link.
#[derive(Debug, Clone)]
pub struct Link {
    model: NetModel,
    rng: DetRng,
    last_delivery: f64,
}

impl Link {
    pub fn new(model: NetModel, from: usize, to: usize) -> Self {
        let seed = match model {
            NetModel::Jitter { seed, .. } => seed,
            NetModel::Fixed { .. } => 0,
        };
        // Distinct, reproducible stream per directed link.
        let mut mix = DetRng::new(seed ^ ((from as u64) << 32 | to as u64));
        let rng = DetRng::new(mix.next_u64());
        Link { model, rng, last_delivery: f64::NEG_INFINITY }
    }

    /// Delivery time of a message sent at `now`.
    pub fn schedule(&mut self, now: f64) -> f64 {
        let latency = match self.model {
            NetModel::Fixed { latency } => latency,
            NetModel::Jitter { min, max, .. } => self.rng.range(min, max),
        };
        let at = (now + latency).max(self.last_delivery);
        self.last_delivery = at;
        at
    }
}
