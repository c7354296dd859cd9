use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataSource, FriendshipOracle, LookupResult, TweetPage};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateLimitPolicy {
    pub max_requests_per_window: usize,
    #[serde(with = "millis")]
    pub window: Duration,
    pub backoff: Backoff,
    /// Retries after the first attempt for backend errors.
    pub max_retries: u32,
}

impl Default for RateLimitPolicy {
    fn default() -> Self {
        RateLimitPolicy {
            max_requests_per_window: 300,
            window: Duration::from_secs(15 * 60),
            backoff: Backoff::default(),
            max_retries: 3,
        }
    }
}

impl RateLimitPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_requests_per_window == 0 || self.window.is_zero() {
            return Err(Error::Config("rate limit window and request budget must be positive".into()));
        }
        self.backoff.validate()
    }
}

/// Exponential backoff: attempt `i` waits `min(max, base * 2^i)` scaled by a
/// factor drawn uniformly from `[1 - jitter, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Backoff {
    #[serde(with = "millis")]
    pub base: Duration,
    #[serde(with = "millis")]
    pub max: Duration,
    pub jitter: f64,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            base: Duration::from_millis(500),
            max: Duration::from_secs(60),
            jitter: 0.5,
        }
    }
}

impl Backoff {
    pub fn validate(&self) -> Result<()> {
        if self.base.is_zero() || self.max < self.base || !(0.0..=1.0).contains(&self.jitter) {
            return Err(Error::Config("backoff needs 0 < base <= max and jitter in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn ceiling(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt.min(31));
        self.base.saturating_mul(factor).min(self.max)
    }

    pub fn delay<R: Rng>(&self, attempt: u32, rng: &mut R) -> Duration {
        let scale = 1.0 - self.jitter * rng.random::<f64>();
        self.ceiling(attempt).mul_f64(scale)
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

pub trait Clock: Send + Sync {
    /// Time since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Manually driven clock; `sleep` advances time instantly.
#[derive(Debug, Default)]
pub struct SimClock {
    now: Mutex<Duration>,
}

impl SimClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }
}

impl Clock for SimClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }
}

/// Sliding-window limiter: at most `max_requests_per_window` grants in any
/// window of length `window`.
pub struct RateLimiter {
    max: usize,
    window: Duration,
    clock: Arc<dyn Clock>,
    issued: Mutex<VecDeque<Duration>>,
}

impl RateLimiter {
    pub fn new(max_requests_per_window: usize, window: Duration, clock: Arc<dyn Clock>) -> Result<Self> {
        if max_requests_per_window == 0 || window.is_zero() {
            return Err(Error::Config("rate limit window and request budget must be positive".into()));
        }
        Ok(RateLimiter {
            max: max_requests_per_window,
            window,
            clock,
            issued: Mutex::new(VecDeque::new()),
        })
    }

    /// Grants one request if the window has room.
    pub fn try_acquire(&self) -> std::result::Result<(), Duration> {
        let now = self.clock.now();
        let mut issued = self.issued.lock().unwrap();
        while issued.front().is_some_and(|&t| t + self.window <= now) {
            issued.pop_front();
        }
        if issued.len() < self.max {
            issued.push_back(now);
            Ok(())
        } else {
            Err(issued[0] + self.window - now)
        }
    }

    /// Blocks on the clock until a request can be issued.
    pub fn acquire(&self) {
        while let Err(wait) = self.try_acquire() {
            self.clock.sleep(wait);
        }
    }

    /// Grant times still inside the current window.
    pub fn in_window(&self) -> usize {
        let now = self.clock.now();
        self.issued
            .lock()
            .unwrap()
            .iter()
            .filter(|&&t| t + self.window > now)
            .count()
    }
}

/// Applies a [`RateLimitPolicy`] to every call on an inner source and retries
/// backend errors with backoff.
pub struct RateLimitedSource<S> {
    inner: S,
    limiter: RateLimiter,
    policy: RateLimitPolicy,
    clock: Arc<dyn Clock>,
    rng: Mutex<ChaCha8Rng>,
}

impl<S: DataSource> RateLimitedSource<S> {
    pub fn new(inner: S, policy: RateLimitPolicy, clock: Arc<dyn Clock>, jitter_seed: u64) -> Result<Self> {
        policy.validate()?;
        Ok(RateLimitedSource {
            inner,
            limiter: RateLimiter::new(policy.max_requests_per_window, policy.window, clock.clone())?,
            policy,
            clock,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(jitter_seed)),
        })
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn limiter(&self) -> &RateLimiter {
        &self.limiter
    }

    fn call<T>(&self, f: impl Fn(&S) -> Result<T>) -> Result<T> {
        let mut attempt = 0;
        loop {
            self.limiter.acquire();
            match f(&self.inner) {
                Err(Error::Backend(_)) if attempt < self.policy.max_retries => {
                    let d = self.policy.backoff.delay(attempt, &mut *self.rng.lock().unwrap());
                    self.clock.sleep(d);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

impl<S: DataSource> FriendshipOracle for RateLimitedSource<S> {
    fn follows(&self, follower: &str, followee: &str) -> Result<bool> {
        self.call(|s| s.follows(follower, followee))
    }
}

impl<S: DataSource> DataSource for RateLimitedSource<S> {
    fn lookup_batch(&self, usernames: &[String]) -> Result<LookupResult> {
        self.call(|s| s.lookup_batch(usernames))
    }

    fn fetch_recent_tweets(&self, username: &str, n: usize) -> Result<TweetPage> {
        self.call(|s| s.fetch_recent_tweets(username, n))
    }

    fn fetch_mentions(&self, username: &str, n: usize) -> Result<TweetPage> {
        self.call(|s| s.fetch_mentions(username, n))
    }

    fn search_users(&self, prefix: &str, limit: usize) -> Result<Vec<String>> {
        self.call(|s| s.search_users(prefix, limit))
    }
}
