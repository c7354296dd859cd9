//! Access to account, tweet and follow-graph data.
//!
//! [`FixtureStore`] is the reference backend: a read-only directory of text
//! files. [`RateLimitedSource`] wraps any backend with a sliding-window
//! request budget and retrying backoff.

mod fixture;
mod live;
mod ratelimit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{AccountRecord, AccountStatus};
use crate::genmodels::VariantRecord;
use crate::mentions::MentionRecord;

pub use fixture::{FixtureStore, FixtureStatus};
pub use live::{LiveBackend, LiveBackendConfig};
pub use ratelimit::{Backoff, Clock, RateLimitPolicy, RateLimitedSource, RateLimiter, SimClock, SystemClock};

pub const DEFAULT_LOOKUP_BATCH: usize = 100;
pub const DEFAULT_TWEET_COUNT: usize = 500;
pub const DEFAULT_SEARCH_LIMIT: usize = 1000;

/// Answers "does `follower` follow `followee`?". An error means the backend
/// could not tell.
pub trait FriendshipOracle: Send + Sync {
    fn follows(&self, follower: &str, followee: &str) -> Result<bool>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Friendship {
    Related,
    Unrelated,
    Unknown,
}

/// Which follow edges count as a relationship between `a` and `b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FollowDirection {
    /// `a` follows `b`.
    AFollowsB,
    /// `b` follows `a`.
    BFollowsA,
    /// Either edge.
    #[default]
    Either,
    /// Both edges.
    Mutual,
}

pub fn friendship(oracle: &dyn FriendshipOracle, a: &str, b: &str, direction: FollowDirection) -> Friendship {
    let verdict = |r: Result<bool>| match r {
        Ok(true) => Friendship::Related,
        Ok(false) => Friendship::Unrelated,
        Err(_) => Friendship::Unknown,
    };
    use Friendship::*;
    match direction {
        FollowDirection::AFollowsB => verdict(oracle.follows(a, b)),
        FollowDirection::BFollowsA => verdict(oracle.follows(b, a)),
        FollowDirection::Either => match (verdict(oracle.follows(a, b)), verdict(oracle.follows(b, a))) {
            (Related, _) | (_, Related) => Related,
            (Unrelated, Unrelated) => Unrelated,
            _ => Unknown,
        },
        FollowDirection::Mutual => match (verdict(oracle.follows(a, b)), verdict(oracle.follows(b, a))) {
            (Unrelated, _) | (_, Unrelated) => Unrelated,
            (Related, Related) => Related,
            _ => Unknown,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum LookupOutcome {
    Active(AccountRecord),
    Suspended,
    NotFound,
    /// The backend failed for this name.
    Failed(String),
}

impl LookupOutcome {
    pub fn status(&self) -> Option<AccountStatus> {
        match self {
            LookupOutcome::Active(_) => Some(AccountStatus::Active),
            LookupOutcome::Suspended => Some(AccountStatus::Suspended),
            LookupOutcome::NotFound => Some(AccountStatus::NotFound),
            LookupOutcome::Failed(_) => None,
        }
    }
}

/// One outcome per requested username, keyed as requested.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LookupResult {
    pub entries: BTreeMap<String, LookupOutcome>,
}

/// Tweets plus the status of the account they were fetched for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TweetPage {
    pub status: AccountStatus,
    pub tweets: Vec<MentionRecord>,
}

pub trait DataSource: FriendshipOracle {
    /// Looks up one batch of names.
    fn lookup_batch(&self, usernames: &[String]) -> Result<LookupResult>;

    /// Up to `n` tweets authored by `username`, newest first.
    fn fetch_recent_tweets(&self, username: &str, n: usize) -> Result<TweetPage>;

    /// Up to `n` tweets mentioning `username`, newest first.
    fn fetch_mentions(&self, username: &str, n: usize) -> Result<TweetPage>;

    /// Usernames starting with `prefix`, in the backend's ranking order.
    fn search_users(&self, prefix: &str, limit: usize) -> Result<Vec<String>>;
}

/// Looks up every name in batches of `batch_size`. A failed batch marks each
/// of its names as failed instead of aborting the whole lookup.
pub fn lookup_accounts(ds: &dyn DataSource, usernames: &[String], batch_size: usize) -> Result<LookupResult> {
    if usernames.is_empty() {
        return Err(Error::invalid("lookup batch is empty"));
    }
    if batch_size == 0 {
        return Err(Error::invalid("lookup batch size must be positive"));
    }
    let mut out = LookupResult::default();
    for chunk in usernames.chunks(batch_size) {
        match ds.lookup_batch(chunk) {
            Ok(res) => {
                for name in chunk {
                    let outcome = res
                        .entries
                        .get(name)
                        .cloned()
                        .unwrap_or_else(|| LookupOutcome::Failed("missing from backend response".into()));
                    out.entries.insert(name.clone(), outcome);
                }
            }
            Err(e) => {
                for name in chunk {
                    out.entries.insert(name.clone(), LookupOutcome::Failed(e.to_string()));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub active: Vec<(VariantRecord, AccountRecord)>,
    pub suspended: Vec<VariantRecord>,
    pub not_found: Vec<VariantRecord>,
    pub unresolved: Vec<(VariantRecord, String)>,
}

impl FilterOutcome {
    pub fn total(&self) -> usize {
        self.active.len() + self.suspended.len() + self.not_found.len() + self.unresolved.len()
    }
}

/// Splits variants by account status, keeping input order within buckets.
pub fn filter_variants(variants: &[VariantRecord], ds: &dyn DataSource, batch_size: usize) -> Result<FilterOutcome> {
    let mut out = FilterOutcome::default();
    if variants.is_empty() {
        return Ok(out);
    }
    let names: Vec<String> = variants.iter().map(|v| v.username.clone()).collect();
    let res = lookup_accounts(ds, &names, batch_size)?;
    for v in variants {
        match &res.entries[&v.username] {
            LookupOutcome::Active(rec) => out.active.push((v.clone(), rec.clone())),
            LookupOutcome::Suspended => out.suspended.push(v.clone()),
            LookupOutcome::NotFound => out.not_found.push(v.clone()),
            LookupOutcome::Failed(msg) => out.unresolved.push((v.clone(), msg.clone())),
        }
    }
    Ok(out)
}
