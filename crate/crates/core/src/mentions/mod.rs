//! Mention-level analyses: typo-mention verdicts and their aggregation,
//! search-rank probing and tweet-content risk checks.

mod content;
mod probe;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datasource::{friendship, FollowDirection, Friendship, FriendshipOracle};
use crate::error::{Error, Result};
use crate::exec;
use crate::similarity::levenshtein;

pub use content::{analyze_tweet_content, ContentRiskReport, TweetText};
pub use probe::{render_rank_table, search_rank_probe, RankProbeResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TweetKind {
    ActualTweet,
    Retweet,
    Reply,
}

/// A tweet by `mentioner` that mentions `mentioned_variant`, a variant of
/// `seed`. Tweets that mention no variant leave both fields empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub tweet_id: String,
    pub mentioner: String,
    #[serde(default)]
    pub mentioned_variant: String,
    #[serde(default)]
    pub seed: String,
    pub kind: TweetKind,
    #[serde(default)]
    pub like_count: u64,
    #[serde(default)]
    pub retweet_count: u64,
    #[serde(default)]
    pub text: String,
    /// Seconds since the epoch.
    #[serde(default)]
    pub created_at: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypoVerdict {
    TypoMention,
    PurposefulMention,
    Unknown,
}

/// Verdict for an original tweet; `None` for retweets and replies, which
/// copy the mention rather than make it.
pub fn classify_mention(
    m: &MentionRecord,
    oracle: &dyn FriendshipOracle,
    direction: FollowDirection,
) -> Option<TypoVerdict> {
    if m.kind != TweetKind::ActualTweet {
        return None;
    }
    Some(match friendship(oracle, &m.mentioner, &m.mentioned_variant, direction) {
        Friendship::Related => TypoVerdict::PurposefulMention,
        Friendship::Unrelated => TypoVerdict::TypoMention,
        Friendship::Unknown => TypoVerdict::Unknown,
    })
}

pub fn classify_mentions(
    records: &[MentionRecord],
    oracle: &dyn FriendshipOracle,
    direction: FollowDirection,
) -> Vec<Option<TypoVerdict>> {
    exec::map(records, |m| classify_mention(m, oracle, direction))
}

/// Account types used to group seed accounts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccountCategory {
    Government,
    Companies,
    News,
    Entertainment,
    Sports,
    Activists,
}

impl AccountCategory {
    pub const ALL: [AccountCategory; 6] = [
        AccountCategory::Government,
        AccountCategory::Companies,
        AccountCategory::News,
        AccountCategory::Entertainment,
        AccountCategory::Sports,
        AccountCategory::Activists,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AccountCategory::Government => "government",
            AccountCategory::Companies => "companies",
            AccountCategory::News => "news",
            AccountCategory::Entertainment => "entertainment",
            AccountCategory::Sports => "sports",
            AccountCategory::Activists => "activists",
        }
    }
}

impl fmt::Display for AccountCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccountCategory {
    type Err = Error;

    /// Accepts the short name or any label starting with it, so
    /// "Sports and gaming" parses as [`AccountCategory::Sports`].
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        AccountCategory::ALL
            .into_iter()
            .find(|c| lower.starts_with(c.as_str()))
            .ok_or_else(|| Error::data(format!("unknown account category {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub typo: usize,
    pub purposeful: usize,
    pub unknown: usize,
}

impl VerdictCounts {
    fn add(&mut self, v: TypoVerdict) {
        match v {
            TypoVerdict::TypoMention => self.typo += 1,
            TypoVerdict::PurposefulMention => self.purposeful += 1,
            TypoVerdict::Unknown => self.unknown += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.typo + self.purposeful + self.unknown
    }
}

pub const ED_BUCKETS: [&str; 4] = ["1", "2", "3", ">=4"];

/// Index into [`ED_BUCKETS`]. Distances of 0 share the first bucket.
pub fn ed_bucket(ed: usize) -> usize {
    ed.clamp(1, 4) - 1
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypoStats {
    pub actual_tweets: usize,
    pub retweets_excluded: usize,
    pub replies_excluded: usize,
    pub verdicts: VerdictCounts,
    /// Keyed by category name; seeds without a category go under
    /// `uncategorized`.
    pub by_category: BTreeMap<String, VerdictCounts>,
    /// Indexed like [`ED_BUCKETS`].
    pub by_edit_distance: [VerdictCounts; 4],
}

pub const UNCATEGORIZED: &str = "uncategorized";

/// Tallies verdicts overall, per seed category and per edit-distance bucket.
/// `categories` is keyed by lowercase seed username.
pub fn aggregate_typo_stats(
    records: &[MentionRecord],
    verdicts: &[Option<TypoVerdict>],
    categories: &BTreeMap<String, AccountCategory>,
) -> Result<TypoStats> {
    if records.len() != verdicts.len() {
        return Err(Error::invalid("one verdict slot per record is required"));
    }
    let mut stats = TypoStats::default();
    for c in AccountCategory::ALL {
        stats.by_category.insert(c.as_str().to_string(), VerdictCounts::default());
    }
    stats.by_category.insert(UNCATEGORIZED.to_string(), VerdictCounts::default());
    for (m, v) in records.iter().zip(verdicts) {
        match (m.kind, v) {
            (TweetKind::Retweet, _) => stats.retweets_excluded += 1,
            (TweetKind::Reply, _) => stats.replies_excluded += 1,
            (TweetKind::ActualTweet, None) => {
                return Err(Error::invalid(format!("tweet {} has no verdict", m.tweet_id)));
            }
            (TweetKind::ActualTweet, Some(v)) => {
                stats.actual_tweets += 1;
                stats.verdicts.add(*v);
                let cat = categories
                    .get(&m.seed.to_ascii_lowercase())
                    .map_or(UNCATEGORIZED, |c| c.as_str());
                stats.by_category.get_mut(cat).expect("all categories present").add(*v);
                let ed = levenshtein(&m.seed.to_ascii_lowercase(), &m.mentioned_variant.to_ascii_lowercase());
                stats.by_edit_distance[ed_bucket(ed)].add(*v);
            }
        }
    }
    Ok(stats)
}

fn write_counts_table(header: &str, rows: impl IntoIterator<Item = (String, VerdictCounts)>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([header, "typo", "purposeful", "unknown", "total"])?;
    for (k, c) in rows {
        w.write_record([
            k,
            c.typo.to_string(),
            c.purposeful.to_string(),
            c.unknown.to_string(),
            c.total().to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Category and edit-distance tables, separated by a blank line.
pub fn render_typo_tables(stats: &TypoStats) -> Result<String> {
    let cats = write_counts_table(
        "category",
        stats.by_category.iter().map(|(k, v)| (k.clone(), *v)),
    )?;
    let eds = write_counts_table(
        "edit_distance",
        ED_BUCKETS.iter().zip(stats.by_edit_distance).map(|(k, v)| (k.to_string(), v)),
    )?;
    Ok(format!("{cats}\n{eds}"))
}
