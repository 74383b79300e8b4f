use std::cell::Cell;
use std::collections::VecDeque;
use std::time::{Duration, Instant};

/// Time source for dispatch and backoff.
pub trait Clock {
    /// Time since the clock started.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

#[derive(Debug, Clone, Copy)]
pub struct SystemClock {
    start: Instant,
}

impl SystemClock {
    pub fn new() -> SystemClock {
        SystemClock { start: Instant::now() }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.start.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// A clock that only moves when slept on.
#[derive(Debug, Default)]
pub struct SimulatedClock {
    now: Cell<Duration>,
}

impl SimulatedClock {
    pub fn new() -> SimulatedClock {
        SimulatedClock::default()
    }

    pub fn advance(&self, d: Duration) {
        self.now.set(self.now.get() + d);
    }
}

impl Clock for SimulatedClock {
    fn now(&self) -> Duration {
        self.now.get()
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now(&self) -> Duration {
        (**self).now()
    }

    fn sleep(&self, d: Duration) {
        (**self).sleep(d)
    }
}

/// At most `limit` dispatches in any `window`.
///
/// A dispatch at `t` counts against every window `[s, s + window)` holding
/// `t`.
#[derive(Debug, Clone)]
pub struct RateLimiter {
    limit: usize,
    window: Duration,
    recent: VecDeque<Duration>,
}

impl RateLimiter {
    pub fn per_minute(limit: usize) -> RateLimiter {
        RateLimiter::new(limit, Duration::from_secs(60))
    }

    pub fn new(limit: usize, window: Duration) -> RateLimiter {
        RateLimiter { limit: limit.max(1), window, recent: VecDeque::new() }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn window(&self) -> Duration {
        self.window
    }

    /// Wait until a dispatch is allowed, record it and return its time.
    pub fn acquire(&mut self, clock: &dyn Clock) -> Duration {
        loop {
            let now = clock.now();
            while self.recent.front().is_some_and(|&t| t + self.window <= now) {
                self.recent.pop_front();
            }
            if self.recent.len() < self.limit {
                self.recent.push_back(now);
                return now;
            }
            let oldest = self.recent[0];
            clock.sleep(oldest + self.window - now);
        }
    }
}
