use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(https?)://[^\s]+").unwrap());
static FOLLOW_ME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bfollow[^\p{L}]{0,3}me\b").unwrap());
static SPACES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").unwrap());

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetText {
    pub author: Option<String>,
    pub text: String,
}

impl TweetText {
    pub fn anonymous(text: impl Into<String>) -> Self {
        TweetText { author: None, text: text.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentRiskReport {
    pub tweets: usize,
    pub urls: usize,
    /// URLs with the plain `http` scheme.
    pub insecure_urls: usize,
    pub follow_me_tweets: usize,
    /// Author counts, present when any tweet carries an author.
    pub distinct_authors: Option<usize>,
    pub authors_with_insecure_urls: Option<usize>,
    pub authors_with_follow_me: Option<usize>,
}

pub fn count_urls(text: &str) -> (usize, usize) {
    let mut all = 0;
    let mut insecure = 0;
    for c in URL.captures_iter(text) {
        all += 1;
        if c[1].eq_ignore_ascii_case("http") {
            insecure += 1;
        }
    }
    (all, insecure)
}

/// True for "follow me" allowing any case, runs of whitespace and up to
/// three non-letter characters between the two words.
pub fn is_follow_me(text: &str) -> bool {
    FOLLOW_ME.is_match(&SPACES.replace_all(text, " "))
}

pub fn analyze_tweet_content(tweets: &[TweetText]) -> ContentRiskReport {
    let mut r = ContentRiskReport { tweets: tweets.len(), ..Default::default() };
    let mut authors = BTreeSet::new();
    let mut insecure_authors = BTreeSet::new();
    let mut follow_authors = BTreeSet::new();
    for t in tweets {
        let (all, insecure) = count_urls(&t.text);
        r.urls += all;
        r.insecure_urls += insecure;
        let follow = is_follow_me(&t.text);
        r.follow_me_tweets += usize::from(follow);
        if let Some(a) = &t.author {
            let a = a.to_ascii_lowercase();
            if insecure > 0 {
                insecure_authors.insert(a.clone());
            }
            if follow {
                follow_authors.insert(a.clone());
            }
            authors.insert(a);
        }
    }
    if !authors.is_empty() {
        r.distinct_authors = Some(authors.len());
        r.authors_with_insecure_urls = Some(insecure_authors.len());
        r.authors_with_follow_me = Some(follow_authors.len());
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anon(texts: &[&str]) -> Vec<TweetText> {
        texts.iter().map(|t| TweetText::anonymous(*t)).collect()
    }

    #[test]
    fn insecure_url() {
        let r = analyze_tweet_content(&anon(&["visit http://x.example now"]));
        assert_eq!((r.urls, r.insecure_urls), (1, 1));
        assert_eq!(r.distinct_authors, None);
    }

    #[test]
    fn secure_url() {
        let r = analyze_tweet_content(&anon(&["https://safe.example"]));
        assert_eq!((r.urls, r.insecure_urls), (1, 0));
    }

    #[test]
    fn follow_me_variations() {
        let r = analyze_tweet_content(&anon(&["Follow me!", "FOLLOW   ME"]));
        assert_eq!(r.follow_me_tweets, 2);
        for hit in ["pls follow.me", "follow 🙏 me", "followme", "Follow\n\tme"] {
            assert!(is_follow_me(hit), "{hit}");
        }
        for miss in ["unfollow me", "follow meetings", "follow the me", "follow ---- me"] {
            assert!(!is_follow_me(miss), "{miss}");
        }
    }

    #[test]
    fn mixed_schemes_and_authors() {
        let tweets = vec![
            TweetText { author: Some("a".into()), text: "HTTP://A.example and https://b.example".into() },
            TweetText { author: Some("A".into()), text: "follow me".into() },
            TweetText { author: Some("b".into()), text: "ftp://c.example".into() },
        ];
        let r = analyze_tweet_content(&tweets);
        assert_eq!((r.urls, r.insecure_urls, r.follow_me_tweets), (2, 1, 1));
        assert_eq!(r.distinct_authors, Some(2));
        assert_eq!(r.authors_with_insecure_urls, Some(1));
        assert_eq!(r.authors_with_follow_me, Some(1));
    }
}
