//! Pairwise account features for a seed and one of its variants.

mod normalize;
mod rfe;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datasource::FriendshipOracle;
use crate::error::{Error, Result};
use crate::learn::Label;
use crate::similarity::{image_similarity, EmbeddingStore, DEFAULT_IMAGE_THRESHOLD};
use crate::similarity::{jaccard_bio, levenshtein, location_match, url_similarity, EmojiMap};

pub use normalize::{apply_normalizer, fit_normalizer, ScalerParams};
pub use rfe::{select_features_rfe_cv, RfeResult, RfeStep};
pub use table::{read_labeled_csv, to_dataset, write_labeled_csv, LABELED_CSV_COMMENT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountStatus {
    Active,
    Suspended,
    NotFound,
}

impl AccountStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            AccountStatus::Active => "active",
            AccountStatus::Suspended => "suspended",
            AccountStatus::NotFound => "not_found",
        }
    }
}

impl fmt::Display for AccountStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccountStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "active" => Ok(AccountStatus::Active),
            "suspended" => Ok(AccountStatus::Suspended),
            "not_found" | "notfound" | "not-found" => Ok(AccountStatus::NotFound),
            other => Err(Error::data(format!("unknown account status {other:?}"))),
        }
    }
}

fn default_active() -> AccountStatus {
    AccountStatus::Active
}

/// Profile snapshot of one account.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccountRecord {
    pub username: String,
    #[serde(default)]
    pub profile_name: String,
    #[serde(default)]
    pub bio: String,
    #[serde(default)]
    pub url: String,
    #[serde(default)]
    pub location: String,
    #[serde(default)]
    pub friends_count: u64,
    #[serde(default)]
    pub followers_count: u64,
    #[serde(default)]
    pub tweet_count: u64,
    #[serde(default)]
    pub retweet_count: u64,
    #[serde(default)]
    pub is_private: bool,
    #[serde(default)]
    pub embedding_ref: Option<String>,
    #[serde(default = "default_active")]
    pub status: AccountStatus,
}

impl AccountRecord {
    /// An active record with every profile field empty.
    pub fn bare(username: impl Into<String>) -> Self {
        AccountRecord {
            username: username.into(),
            profile_name: String::new(),
            bio: String::new(),
            url: String::new(),
            location: String::new(),
            friends_count: 0,
            followers_count: 0,
            tweet_count: 0,
            retweet_count: 0,
            is_private: false,
            embedding_ref: None,
            status: AccountStatus::Active,
        }
    }
}

pub const N_FEATURES: usize = 12;

/// Column order used by every feature table and model.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "profile_name_ed",
    "username_ed",
    "image_score",
    "image_binary",
    "friendship",
    "friends_count",
    "tweet_count",
    "bio_similarity",
    "url_similarity",
    "location",
    "retweets_count",
    "is_private",
];

pub fn feature_names() -> Vec<String> {
    FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub profile_name_ed: f64,
    pub username_ed: f64,
    pub image_score: f64,
    pub image_binary: f64,
    pub friendship: f64,
    pub friends_count: f64,
    pub tweet_count: f64,
    pub bio_similarity: f64,
    pub url_similarity: f64,
    pub location: f64,
    pub retweets_count: f64,
    pub is_private: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.profile_name_ed,
            self.username_ed,
            self.image_score,
            self.image_binary,
            self.friendship,
            self.friends_count,
            self.tweet_count,
            self.bio_similarity,
            self.url_similarity,
            self.location,
            self.retweets_count,
            self.is_private,
        ]
    }

    pub fn from_array(a: [f64; N_FEATURES]) -> Self {
        FeatureVector {
            profile_name_ed: a[0],
            username_ed: a[1],
            image_score: a[2],
            image_binary: a[3],
            friendship: a[4],
            friends_count: a[5],
            tweet_count: a[6],
            bio_similarity: a[7],
            url_similarity: a[8],
            location: a[9],
            retweets_count: a[10],
            is_private: a[11],
        }
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let a: [f64; N_FEATURES] = values
            .try_into()
            .map_err(|_| Error::invalid(format!("expected {N_FEATURES} features, got {}", values.len())))?;
        Ok(Self::from_array(a))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub seed: String,
    pub variant: String,
    pub features: FeatureVector,
    pub label: Label,
}

#[derive(Clone, Debug)]
pub struct ExtractOptions {
    pub image_threshold: f64,
    pub emoji: EmojiMap,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            image_threshold: DEFAULT_IMAGE_THRESHOLD,
            emoji: EmojiMap::default(),
        }
    }
}

/// Raw features plus whether any input could not be resolved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub features: FeatureVector,
    /// The friendship query failed; `friendship` was recorded as 0.
    pub incomplete: bool,
}

/// Score used when either account lacks a usable face embedding.
pub const MISSING_IMAGE_SCORE: f64 = 1.0;

fn image_features(seed: &AccountRecord, variant: &AccountRecord, store: &EmbeddingStore, threshold: f64) -> (f64, f64) {
    let lookup = |r: &AccountRecord| r.embedding_ref.as_deref().and_then(|id| store.vector(id));
    match (lookup(seed), lookup(variant)) {
        (Some(a), Some(b)) => match image_similarity(a, b, threshold) {
            Ok(res) => (res.score, if res.is_similar { 1.0 } else { 0.0 }),
            Err(_) => (MISSING_IMAGE_SCORE, 0.0),
        },
        _ => (MISSING_IMAGE_SCORE, 0.0),
    }
}

/// Computes the unnormalized feature vector for a (seed, variant) pair.
pub fn extract_features(
    seed: &AccountRecord,
    variant: &AccountRecord,
    oracle: &dyn FriendshipOracle,
    embeddings: &EmbeddingStore,
    opts: &ExtractOptions,
) -> Result<Extraction> {
    for r in [seed, variant] {
        if r.status != AccountStatus::Active {
            return Err(Error::invalid(format!("account {} is {}", r.username, r.status)));
        }
    }
    let (image_score, image_binary) = image_features(seed, variant, embeddings, opts.image_threshold);
    let (friendship, incomplete) = match oracle.follows(&variant.username, &seed.username) {
        Ok(true) => (1.0, false),
        Ok(false) => (0.0, false),
        Err(_) => (0.0, true),
    };
    let features = FeatureVector {
        profile_name_ed: levenshtein(&seed.profile_name, &variant.profile_name) as f64,
        username_ed: levenshtein(&seed.username.to_ascii_lowercase(), &variant.username.to_ascii_lowercase()) as f64,
        image_score,
        image_binary,
        friendship,
        friends_count: variant.friends_count as f64,
        tweet_count: variant.tweet_count as f64,
        bio_similarity: jaccard_bio(&seed.bio, &variant.bio, &opts.emoji),
        url_similarity: url_similarity(&seed.username, &seed.url, &variant.url) as f64,
        location: location_match(&seed.location, &variant.location) as f64,
        retweets_count: variant.retweet_count as f64,
        is_private: if variant.is_private { 1.0 } else { 0.0 },
    };
    Ok(Extraction { features, incomplete })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::ImageEmbedding;

    struct Edges(Vec<(&'static str, &'static str)>);

    impl FriendshipOracle for Edges {
        fn follows(&self, follower: &str, followee: &str) -> Result<bool> {
            Ok(self.0.iter().any(|&(a, b)| a == follower && b == followee))
        }
    }

    struct Broken;

    impl FriendshipOracle for Broken {
        fn follows(&self, _: &str, _: &str) -> Result<bool> {
            Err(Error::Backend("offline".into()))
        }
    }

    fn cnn() -> AccountRecord {
        AccountRecord {
            profile_name: "CNN Breaking News".into(),
            bio: "Breaking news from CNN".into(),
            url: "cnn.com".into(),
            location: "Everywhere".into(),
            friends_count: 120,
            tweet_count: 9000,
            embedding_ref: Some("cnnbrk".into()),
            ..AccountRecord::bare("cnnbrk")
        }
    }

    fn store() -> EmbeddingStore {
        let mut s = EmbeddingStore::new(2);
        s.insert_vector(ImageEmbedding::new("cnnbrk", vec![1.0, 0.0]).unwrap()).unwrap();
        s.insert_vector(ImageEmbedding::new("near", vec![1.0, 0.1]).unwrap()).unwrap();
        s.insert_vector(ImageEmbedding::new("far", vec![0.0, 1.0]).unwrap()).unwrap();
        s
    }

    #[test]
    fn self_pair() {
        let s = cnn();
        let x = extract_features(&s, &s, &Edges(vec![]), &store(), &ExtractOptions::default()).unwrap();
        let f = x.features;
        assert_eq!(f.profile_name_ed, 0.0);
        assert_eq!(f.username_ed, 0.0);
        assert_eq!(f.bio_similarity, 1.0);
        assert_eq!(f.url_similarity, 1.0);
        assert_eq!(f.location, 1.0);
        assert_eq!(f.image_score, 0.0);
        assert_eq!(f.image_binary, 1.0);
        assert!(!x.incomplete);
    }

    #[test]
    fn disjoint_variant() {
        let v = AccountRecord {
            profile_name: "Gardening tips".into(),
            bio: "tomatoes and roses".into(),
            friends_count: 7,
            retweet_count: 3,
            is_private: true,
            embedding_ref: Some("far".into()),
            ..AccountRecord::bare("cnnnbrk")
        };
        let x = extract_features(&cnn(), &v, &Edges(vec![]), &store(), &ExtractOptions::default()).unwrap();
        let f = x.features;
        assert_eq!(f.username_ed, 1.0);
        assert_eq!(f.friendship, 0.0);
        assert_eq!(f.bio_similarity, 0.0);
        assert_eq!(f.url_similarity, 0.0);
        assert_eq!(f.location, 0.0);
        assert!((f.image_score - 2f64.sqrt()).abs() < 1e-6);
        assert_eq!(f.image_binary, 0.0);
        assert_eq!(f.friends_count, 7.0);
        assert_eq!(f.retweets_count, 3.0);
        assert_eq!(f.is_private, 1.0);
    }

    #[test]
    fn friendship_is_variant_follows_seed() {
        let v = AccountRecord::bare("cnnbrkk");
        let s = cnn();
        let fwd = Edges(vec![("cnnbrkk", "cnnbrk")]);
        let back = Edges(vec![("cnnbrk", "cnnbrkk")]);
        let o = ExtractOptions::default();
        assert_eq!(extract_features(&s, &v, &fwd, &store(), &o).unwrap().features.friendship, 1.0);
        assert_eq!(extract_features(&s, &v, &back, &store(), &o).unwrap().features.friendship, 0.0);
    }

    #[test]
    fn missing_embedding_sentinel() {
        let v = AccountRecord::bare("cnnbrk_");
        let f = extract_features(&cnn(), &v, &Edges(vec![]), &store(), &ExtractOptions::default())
            .unwrap()
            .features;
        assert_eq!(f.image_score, MISSING_IMAGE_SCORE);
        assert_eq!(f.image_binary, 0.0);
    }

    #[test]
    fn similar_image() {
        let v = AccountRecord { embedding_ref: Some("near".into()), ..AccountRecord::bare("cnnbrk_") };
        let f = extract_features(&cnn(), &v, &Edges(vec![]), &store(), &ExtractOptions::default())
            .unwrap()
            .features;
        assert!(f.image_score < 0.65);
        assert_eq!(f.image_binary, 1.0);
    }

    #[test]
    fn oracle_failure_flags_incomplete() {
        let v = AccountRecord::bare("cnnbrk_");
        let x = extract_features(&cnn(), &v, &Broken, &store(), &ExtractOptions::default()).unwrap();
        assert!(x.incomplete);
        assert_eq!(x.features.friendship, 0.0);
    }

    #[test]
    fn inactive_rejected() {
        let v = AccountRecord { status: AccountStatus::Suspended, ..AccountRecord::bare("cnnbrk_") };
        assert!(extract_features(&cnn(), &v, &Edges(vec![]), &store(), &ExtractOptions::default()).is_err());
    }

    #[test]
    fn symmetric_only_where_metric_is() {
        let a = AccountRecord { bio: "news daily".into(), url: "a.example".into(), ..cnn() };
        let b = AccountRecord {
            profile_name: "CNN Breaking".into(),
            bio: "daily sports".into(),
            url: "cnnbrk.example".into(),
            ..AccountRecord::bare("cnnbrk_")
        };
        let edges = Edges(vec![("cnnbrk_", "cnnbrk")]);
        let o = ExtractOptions::default();
        let ab = extract_features(&a, &b, &edges, &store(), &o).unwrap().features;
        let ba = extract_features(&b, &a, &edges, &store(), &o).unwrap().features;
        assert_eq!(ab.profile_name_ed, ba.profile_name_ed);
        assert_eq!(ab.username_ed, ba.username_ed);
        assert_eq!(ab.bio_similarity, ba.bio_similarity);
        assert_ne!(ab.url_similarity, ba.url_similarity);
        assert_ne!(ab.friendship, ba.friendship);
    }

    #[test]
    fn array_round_trip() {
        let a: [f64; N_FEATURES] = std::array::from_fn(|i| i as f64);
        assert_eq!(FeatureVector::from_array(a).to_array(), a);
        assert!(FeatureVector::from_slice(&a[..11]).is_err());
    }

    #[test]
    fn account_record_defaults() {
        let r: AccountRecord = serde_json::from_str(r#"{"username":"kaka"}"#).unwrap();
        assert_eq!(r, AccountRecord::bare("kaka"));
    }
}
