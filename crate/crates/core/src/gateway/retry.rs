//! Capped exponential backoff with decorrelated jitter.

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digest::seed_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay_ms: 500,
            max_delay_ms: 30_000,
            jitter: true,
        }
    }
}

/// Delay sequence for one request. Jitter is seeded from the request digest
/// so a rerun waits the same way.
pub(crate) struct Backoff {
    base: u64,
    cap: u64,
    jitter: bool,
    prev: u64,
    rng: ChaCha8Rng,
}

impl Backoff {
    pub(crate) fn new(policy: &RetryPolicy, salt: &str) -> Backoff {
        Backoff {
            base: policy.base_delay_ms,
            cap: policy.max_delay_ms.max(policy.base_delay_ms),
            jitter: policy.jitter,
            prev: policy.base_delay_ms,
            rng: ChaCha8Rng::seed_from_u64(seed_from(&[b"backoff", salt.as_bytes()])),
        }
    }

    /// Next wait. A server `Retry-After` hint wins when it is longer.
    pub(crate) fn next_delay(&mut self, hint: Option<Duration>) -> Duration {
        let next = if self.jitter {
            let hi = self.prev.saturating_mul(3).max(self.base + 1);
            self.rng.random_range(self.base..hi)
        } else {
            self.prev.saturating_mul(2)
        };
        let ms = next.min(self.cap);
        self.prev = if self.jitter { ms } else { ms.max(self.base) };
        let d = Duration::from_millis(ms);
        match hint {
            Some(h) if h > d => h.min(Duration::from_millis(self.cap)),
            _ => d,
        }
    }
}
