//! Sliding-window request limiter.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Admits at most `limit` requests in any window of length `window`.
/// Every admission time is kept so tests can inspect the schedule.
pub struct RateLimiter {
    limit: usize,
    window: Duration,
    state: Mutex<LimiterState>,
}

struct LimiterState {
    recent: VecDeque<Instant>,
    log: Vec<Instant>,
}

impl RateLimiter {
    pub fn per_minute(limit: u32) -> RateLimiter {
        RateLimiter::new(limit, Duration::from_secs(60))
    }

    pub fn new(limit: u32, window: Duration) -> RateLimiter {
        RateLimiter {
            limit: limit.max(1) as usize,
            window,
            state: Mutex::new(LimiterState {
                recent: VecDeque::new(),
                log: Vec::new(),
            }),
        }
    }

    /// Blocks until a slot is free, then records the admission.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().expect("limiter lock");
                let now = Instant::now();
                while st.recent.front().is_some_and(|t| now.duration_since(*t) >= self.window) {
                    st.recent.pop_front();
                }
                if st.recent.len() < self.limit {
                    st.recent.push_back(now);
                    st.log.push(now);
                    return;
                }
                self.window - now.duration_since(*st.recent.front().expect("non-empty"))
            };
            std::thread::sleep(wait);
        }
    }

    /// All admission instants so far, in order.
    pub fn admissions(&self) -> Vec<Instant> {
        self.state.lock().expect("limiter lock").log.clone()
    }
}
