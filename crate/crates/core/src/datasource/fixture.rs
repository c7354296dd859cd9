use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use super::{DataSource, FriendshipOracle, LookupOutcome, LookupResult, TweetPage};
use crate::error::{Error, Result};
use crate::features::{AccountRecord, AccountStatus};
use crate::mentions::MentionRecord;
use crate::similarity::EmbeddingStore;

/// Status override from `statuses.csv`. `Error` makes every query touching
/// the name fail, which stands in for backend outages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureStatus {
    Account(AccountStatus),
    Error,
}

impl FromStr for FixtureStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("error") {
            Ok(FixtureStatus::Error)
        } else {
            s.parse().map(FixtureStatus::Account)
        }
    }
}

/// Read-only, file-backed data source. All name lookups are
/// case-insensitive.
///
/// Layout of a fixture directory (only `accounts.jsonl` is required):
///
/// * `accounts.jsonl`: one account record per line
/// * `statuses.csv`: `username,status` with status `active`, `suspended`,
///   `not_found` or `error`
/// * `edges.csv`: `follower,followee`
/// * `tweets.jsonl`: one mention record per line
/// * `embeddings.vec`: face embeddings keyed by `embedding_ref`
/// * `categories.csv`: `seed,category`
#[derive(Clone, Debug, Default)]
pub struct FixtureStore {
    accounts: BTreeMap<String, AccountRecord>,
    statuses: BTreeMap<String, FixtureStatus>,
    edges: BTreeSet<(String, String)>,
    tweets: Vec<MentionRecord>,
    embeddings: EmbeddingStore,
    categories: BTreeMap<String, String>,
}

fn key(name: &str) -> String {
    name.trim().to_ascii_lowercase()
}

fn open(dir: &Path, name: &str) -> Result<Option<BufReader<File>>> {
    let path = dir.join(name);
    match File::open(&path) {
        Ok(f) => Ok(Some(BufReader::new(f))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(r: impl BufRead, file: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::data(format!("{file} line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

fn read_pairs(r: impl BufRead, file: &str) -> Result<Vec<(String, String)>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::data(format!("{file}: expected 2 columns, got {}", rec.len())));
        }
        out.push((rec[0].trim().to_string(), rec[1].trim().to_string()));
    }
    Ok(out)
}

impl FixtureStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let accounts_file = open(dir, "accounts.jsonl")?
            .ok_or_else(|| Error::data(format!("{} has no accounts.jsonl", dir.display())))?;
        let mut store = FixtureStore::new();
        for rec in read_jsonl::<AccountRecord>(accounts_file, "accounts.jsonl")? {
            store.add_account(rec)?;
        }
        if let Some(r) = open(dir, "statuses.csv")? {
            for (name, status) in read_pairs(r, "statuses.csv")? {
                store.set_status(&name, status.parse()?);
            }
        }
        if let Some(r) = open(dir, "edges.csv")? {
            for (a, b) in read_pairs(r, "edges.csv")? {
                store.add_edge(&a, &b)?;
            }
        }
        if let Some(r) = open(dir, "tweets.jsonl")? {
            for t in read_jsonl::<MentionRecord>(r, "tweets.jsonl")? {
                store.add_tweet(t);
            }
        }
        if let Some(r) = open(dir, "embeddings.vec")? {
            store.embeddings = EmbeddingStore::read(r)?;
        }
        if let Some(r) = open(dir, "categories.csv")? {
            for (seed, cat) in read_pairs(r, "categories.csv")? {
                store.categories.insert(key(&seed), cat);
            }
        }
        Ok(store)
    }

    pub fn add_account(&mut self, rec: AccountRecord) -> Result<()> {
        let k = key(&rec.username);
        if self.accounts.contains_key(&k) {
            return Err(Error::data(format!("duplicate account {}", rec.username)));
        }
        if rec.status != AccountStatus::Active {
            self.statuses.insert(k.clone(), FixtureStatus::Account(rec.status));
        }
        self.accounts.insert(k, rec);
        Ok(())
    }

    pub fn set_status(&mut self, username: &str, status: FixtureStatus) {
        self.statuses.insert(key(username), status);
    }

    /// Adds `follower -> followee`. Both names must be known to the store.
    pub fn add_edge(&mut self, follower: &str, followee: &str) -> Result<()> {
        for n in [follower, followee] {
            if !self.knows(n) {
                return Err(Error::data(format!("edge references unknown account {n}")));
            }
        }
        self.edges.insert((key(follower), key(followee)));
        Ok(())
    }

    pub fn add_tweet(&mut self, t: MentionRecord) {
        self.tweets.push(t);
    }

    pub fn set_embeddings(&mut self, store: EmbeddingStore) {
        self.embeddings = store;
    }

    pub fn set_category(&mut self, seed: &str, category: impl Into<String>) {
        self.categories.insert(key(seed), category.into());
    }

    fn knows(&self, name: &str) -> bool {
        let k = key(name);
        self.accounts.contains_key(&k) || self.statuses.contains_key(&k)
    }

    pub fn status_of(&self, name: &str) -> FixtureStatus {
        let k = key(name);
        if let Some(s) = self.statuses.get(&k) {
            return *s;
        }
        if self.accounts.contains_key(&k) {
            FixtureStatus::Account(AccountStatus::Active)
        } else {
            FixtureStatus::Account(AccountStatus::NotFound)
        }
    }

    /// The stored record if the account is active.
    pub fn account(&self, name: &str) -> Option<&AccountRecord> {
        match self.status_of(name) {
            FixtureStatus::Account(AccountStatus::Active) => self.accounts.get(&key(name)),
            _ => None,
        }
    }

    pub fn embeddings(&self) -> &EmbeddingStore {
        &self.embeddings
    }

    pub fn categories(&self) -> &BTreeMap<String, String> {
        &self.categories
    }

    pub fn tweets(&self) -> &[MentionRecord] {
        &self.tweets
    }

    fn is_active(&self, name: &str) -> bool {
        self.status_of(name) == FixtureStatus::Account(AccountStatus::Active)
    }

    fn page(&self, name: &str, n: usize, select: impl Fn(&MentionRecord) -> bool) -> Result<TweetPage> {
        let status = match self.status_of(name) {
            FixtureStatus::Error => return Err(Error::Backend(format!("tweet fetch for {name} failed"))),
            FixtureStatus::Account(s) => s,
        };
        if status != AccountStatus::Active {
            return Ok(TweetPage { status, tweets: Vec::new() });
        }
        let mut tweets: Vec<MentionRecord> = self.tweets.iter().filter(|t| select(t)).cloned().collect();
        tweets.sort_by(|a, b| b.created_at.cmp(&a.created_at).then_with(|| a.tweet_id.cmp(&b.tweet_id)));
        tweets.truncate(n);
        Ok(TweetPage { status, tweets })
    }
}

impl FriendshipOracle for FixtureStore {
    /// Fails unless both accounts are active, as a live backend does for
    /// suspended or missing accounts.
    fn follows(&self, follower: &str, followee: &str) -> Result<bool> {
        for n in [follower, followee] {
            if !self.is_active(n) {
                return Err(Error::Backend(format!("no friendship data for {n}")));
            }
        }
        Ok(self.edges.contains(&(key(follower), key(followee))))
    }
}

impl DataSource for FixtureStore {
    fn lookup_batch(&self, usernames: &[String]) -> Result<LookupResult> {
        let mut out = LookupResult::default();
        for name in usernames {
            let outcome = match self.status_of(name) {
                FixtureStatus::Error => LookupOutcome::Failed(format!("lookup for {name} failed")),
                FixtureStatus::Account(AccountStatus::Suspended) => LookupOutcome::Suspended,
                FixtureStatus::Account(AccountStatus::NotFound) => LookupOutcome::NotFound,
                FixtureStatus::Account(AccountStatus::Active) => match self.accounts.get(&key(name)) {
                    Some(rec) => LookupOutcome::Active(AccountRecord {
                        status: AccountStatus::Active,
                        ..rec.clone()
                    }),
                    None => LookupOutcome::Failed(format!("{name} marked active but has no record")),
                },
            };
            out.entries.insert(name.clone(), outcome);
        }
        Ok(out)
    }

    fn fetch_recent_tweets(&self, username: &str, n: usize) -> Result<TweetPage> {
        let k = key(username);
        self.page(username, n, |t| key(&t.mentioner) == k)
    }

    fn fetch_mentions(&self, username: &str, n: usize) -> Result<TweetPage> {
        let k = key(username);
        self.page(username, n, |t| key(&t.mentioned_variant) == k)
    }

    /// Active accounts whose username starts with `prefix`, ordered by
    /// followers descending, then username ascending.
    fn search_users(&self, prefix: &str, limit: usize) -> Result<Vec<String>> {
        if prefix.is_empty() {
            return Err(Error::invalid("search prefix is empty"));
        }
        let p = key(prefix);
        let mut hits: Vec<&AccountRecord> = self
            .accounts
            .iter()
            .filter(|(k, _)| k.starts_with(&p) && self.is_active(k))
            .map(|(_, r)| r)
            .collect();
        hits.sort_by(|a, b| {
            b.followers_count
                .cmp(&a.followers_count)
                .then_with(|| key(&a.username).cmp(&key(&b.username)))
        });
        Ok(hits.into_iter().take(limit).map(|r| r.username.clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasource::{filter_variants, lookup_accounts};
    use crate::genmodels::{GenerationModelId, VariantRecord};
    use crate::mentions::TweetKind;

    fn acct(name: &str, followers: u64) -> AccountRecord {
        AccountRecord { followers_count: followers, ..AccountRecord::bare(name) }
    }

    fn store() -> FixtureStore {
        let mut s = FixtureStore::new();
        s.add_account(acct("cristiano", 500)).unwrap();
        s.add_account(acct("cristiano7", 900)).unwrap();
        s.add_account(acct("cristian0", 10)).unwrap();
        s.add_account(acct("cristianoo", 10)).unwrap();
        s.set_status("baddguy123", FixtureStatus::Account(AccountStatus::Suspended));
        s.set_status("flaky", FixtureStatus::Error);
        s.add_edge("cristiano7", "cristiano").unwrap();
        s
    }

    fn tweet(id: &str, author: &str, at: i64) -> MentionRecord {
        MentionRecord {
            tweet_id: id.into(),
            mentioner: author.into(),
            mentioned_variant: "cristian0".into(),
            seed: "cristiano".into(),
            kind: TweetKind::ActualTweet,
            like_count: 0,
            retweet_count: 0,
            text: String::new(),
            created_at: at,
        }
    }

    fn variant(name: &str) -> VariantRecord {
        VariantRecord {
            username: name.into(),
            seed: "cristiano".into(),
            provenance: vec![GenerationModelId::NumberInsertion],
            repetition_depth: 1,
            edit_distance: 1,
        }
    }

    #[test]
    fn lookups() {
        let s = store();
        let names: Vec<String> = ["cristiano", "baddguy123", "nobody", "flaky", "CRISTIANO"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let r = lookup_accounts(&s, &names, 2).unwrap();
        assert_eq!(r.entries.len(), 5);
        assert!(matches!(&r.entries["cristiano"], LookupOutcome::Active(rec) if rec.username == "cristiano"));
        assert!(matches!(&r.entries["CRISTIANO"], LookupOutcome::Active(_)));
        assert_eq!(r.entries["baddguy123"], LookupOutcome::Suspended);
        assert_eq!(r.entries["nobody"], LookupOutcome::NotFound);
        assert!(matches!(r.entries["flaky"], LookupOutcome::Failed(_)));
        assert!(lookup_accounts(&s, &[], 100).is_err());
    }

    #[test]
    fn filter_partition() {
        let s = store();
        let vs: Vec<VariantRecord> = ["cristiano7", "cristian0", "cristianoo", "baddguy123", "flaky", "a", "b", "c", "d", "e"]
            .iter()
            .map(|n| variant(n))
            .collect();
        let f = filter_variants(&vs, &s, 100).unwrap();
        assert_eq!((f.active.len(), f.suspended.len(), f.not_found.len(), f.unresolved.len()), (3, 1, 5, 1));
        assert_eq!(f.total(), vs.len());
        let mut seen = BTreeSet::new();
        for name in f
            .active
            .iter()
            .map(|(v, _)| &v.username)
            .chain(f.suspended.iter().map(|v| &v.username))
            .chain(f.not_found.iter().map(|v| &v.username))
            .chain(f.unresolved.iter().map(|(v, _)| &v.username))
        {
            assert!(seen.insert(name.clone()));
        }
        assert_eq!(filter_variants(&vs, &s, 3).unwrap(), f);
        assert_eq!(filter_variants(&[], &s, 100).unwrap().total(), 0);
    }

    #[test]
    fn follows_needs_active_accounts() {
        let s = store();
        assert!(s.follows("cristiano7", "cristiano").unwrap());
        assert!(!s.follows("cristiano", "cristiano7").unwrap());
        assert!(s.follows("baddguy123", "cristiano").is_err());
        assert!(s.follows("nobody", "cristiano").is_err());
        assert!(s.follows("flaky", "cristiano").is_err());
    }

    #[test]
    fn edges_must_reference_known_accounts() {
        let mut s = store();
        assert!(s.add_edge("ghost", "cristiano").is_err());
        assert!(s.add_edge("baddguy123", "cristiano").is_ok());
    }

    #[test]
    fn search_ranking() {
        let s = store();
        assert_eq!(
            s.search_users("Crist", 10).unwrap(),
            vec!["cristiano7", "cristiano", "cristian0", "cristianoo"]
        );
        assert_eq!(s.search_users("cristiano", 2).unwrap(), vec!["cristiano7", "cristiano"]);
        assert!(s.search_users("zzz", 10).unwrap().is_empty());
        assert!(s.search_users("", 10).is_err());
    }

    #[test]
    fn tweets_newest_first() {
        let mut s = store();
        s.add_tweet(tweet("1", "cristiano7", 10));
        s.add_tweet(tweet("3", "cristiano7", 30));
        s.add_tweet(tweet("2", "cristiano7", 20));
        s.add_tweet(tweet("4", "cristianoo", 40));
        let page = s.fetch_recent_tweets("cristiano7", 2).unwrap();
        let ids: Vec<&str> = page.tweets.iter().map(|t| t.tweet_id.as_str()).collect();
        assert_eq!(ids, vec!["3", "2"]);
        assert_eq!(s.fetch_mentions("cristian0", 500).unwrap().tweets.len(), 4);
        let gone = s.fetch_recent_tweets("baddguy123", 5).unwrap();
        assert_eq!(gone.status, AccountStatus::Suspended);
        assert!(gone.tweets.is_empty());
        assert!(s.fetch_recent_tweets("flaky", 5).is_err());
    }

    #[test]
    fn identical_queries_identical_bytes() {
        let s = store();
        let names: Vec<String> = vec!["cristiano".into(), "nobody".into()];
        let a = serde_json::to_vec(&s.lookup_batch(&names).unwrap()).unwrap();
        let b = serde_json::to_vec(&store().lookup_batch(&names).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
