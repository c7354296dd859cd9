//! Pairwise similarity primitives used by feature extraction and the
//! amplification analyses.

mod embedding;
mod emoji;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use embedding::{
    image_similarity, EmbeddingEntry, EmbeddingStore, ImageEmbedding, ImageSimilarityResult,
    DEFAULT_IMAGE_THRESHOLD,
};
pub use emoji::EmojiMap;

/// Levenshtein distance over Unicode scalar values, two-row dynamic
/// programming.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (short, long) = if a.len() < b.len() { (&a, &b) } else { (&b, &a) };
    if short.is_empty() {
        return long.len();
    }
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(lc != sc);
            row[j + 1] = (above + 1).min(row[j] + 1).min(diag + cost);
            diag = above;
        }
    }
    row[short.len()]
}

/// Lowercased word tokens with emoji replaced by their names. Anything that
/// is not alphanumeric separates tokens.
pub fn bio_tokens(bio: &str, emoji: &EmojiMap) -> BTreeSet<String> {
    let mut expanded = String::with_capacity(bio.len());
    for c in bio.chars() {
        match emoji.word_for(c) {
            Some(word) => {
                expanded.push(' ');
                expanded.push_str(word);
                expanded.push(' ');
            }
            None => expanded.extend(c.to_lowercase()),
        }
    }
    expanded
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Jaccard index of the two bios' token sets. Two empty bios score 0.
pub fn jaccard_bio(bio_a: &str, bio_b: &str, emoji: &EmojiMap) -> f64 {
    let a = bio_tokens(bio_a, emoji);
    let b = bio_tokens(bio_b, emoji);
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Strips the scheme and trailing slashes and lowercases the host.
pub fn normalize_url(url: &str) -> String {
    let mut rest = url.trim();
    if let Some(idx) = rest.find("://") {
        rest = &rest[idx + 3..];
    }
    let rest = rest.trim_end_matches('/');
    match rest.find('/') {
        Some(idx) => format!("{}{}", rest[..idx].to_ascii_lowercase(), &rest[idx..]),
        None => rest.to_ascii_lowercase(),
    }
}

/// 1 when the variant's website equals the seed's, or when it contains the
/// seed username (case-insensitively); 0 otherwise. An empty variant URL is
/// always 0.
pub fn url_similarity(seed_username: &str, seed_url: &str, variant_url: &str) -> u8 {
    let variant = normalize_url(variant_url);
    if variant.is_empty() {
        return 0;
    }
    if normalize_url(seed_url) == variant {
        return 1;
    }
    let seed = seed_username.trim().trim_start_matches('@').to_lowercase();
    u8::from(!seed.is_empty() && variant.to_lowercase().contains(&seed))
}

fn normalize_text(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// 1 when both locations normalize to the same text, including both empty.
pub fn location_match(loc_a: &str, loc_b: &str) -> u8 {
    u8::from(normalize_text(loc_a) == normalize_text(loc_b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileNameVerdict {
    ExactMatch,
    /// The variant's name contains the seed's name plus extra characters.
    ExactPlusExtra,
    /// At least one word of the seed's name occurs in the variant's name.
    WordSubset,
    Other,
}

/// Compares display names case-insensitively with whitespace collapsed.
/// Verdicts take precedence in declaration order.
pub fn profile_name_similarity(seed_name: &str, variant_name: &str) -> ProfileNameVerdict {
    let seed = normalize_text(seed_name);
    let variant = normalize_text(variant_name);
    if seed.is_empty() {
        return if variant.is_empty() {
            ProfileNameVerdict::ExactMatch
        } else {
            ProfileNameVerdict::Other
        };
    }
    if seed == variant {
        ProfileNameVerdict::ExactMatch
    } else if variant.contains(&seed) {
        ProfileNameVerdict::ExactPlusExtra
    } else if seed.split(' ').any(|w| variant.contains(w)) {
        ProfileNameVerdict::WordSubset
    } else {
        ProfileNameVerdict::Other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("cnnbrk", "cnnnbrk"), 1);
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("Twitter", "Twier"), 2);
        assert_eq!(levenshtein("café", "cafe"), 1);
    }

    #[test]
    fn jaccard_cases() {
        let e = EmojiMap::default();
        assert_eq!(jaccard_bio("Official account", "Official account", &e), 1.0);
        assert_eq!(jaccard_bio("alpha beta", "gamma delta", &e), 0.0);
        assert!((jaccard_bio("a b", "b c", &e) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(jaccard_bio("", "", &e), 0.0);
        assert_eq!(jaccard_bio("", "something", &e), 0.0);
        assert_eq!(jaccard_bio("Football, LIFE!", "football life", &e), 1.0);
    }

    #[test]
    fn emoji_become_words() {
        let e = EmojiMap::default();
        let toks = bio_tokens("I ❤ football⚽", &e);
        assert!(toks.contains("heart"));
        assert!(toks.contains("soccer"));
        assert!(toks.contains("football"));
        assert_eq!(jaccard_bio("❤", "heart", &e), 1.0);
    }

    #[test]
    fn url_rules() {
        assert_eq!(url_similarity("kaka", "example.com/kaka", "example.com/kaka"), 1);
        assert_eq!(url_similarity("cristiano", "cr7.example", "cristiano-shop.example"), 1);
        assert_eq!(url_similarity("nasa", "nasa.gov", "unrelated.example"), 0);
        assert_eq!(url_similarity("nasa", "https://NASA.gov/", "http://nasa.gov"), 1);
        assert_eq!(url_similarity("x", "", ""), 0);
        assert_eq!(url_similarity("x", "site.example", ""), 0);
        assert_eq!(url_similarity("Cristiano", "", "https://CRISTIANO.example"), 1);
    }

    #[test]
    fn url_normalization_keeps_path_case() {
        assert_eq!(normalize_url("HTTPS://Example.COM/Path/"), "example.com/Path");
    }

    #[test]
    fn location_rules() {
        assert_eq!(location_match("", ""), 1);
        assert_eq!(location_match("London", "london "), 1);
        assert_eq!(location_match("  New   York", "new york"), 1);
        assert_eq!(location_match("London", "Paris"), 0);
        assert_eq!(location_match("London", ""), 0);
    }

    #[test]
    fn profile_names() {
        use ProfileNameVerdict::*;
        assert_eq!(profile_name_similarity("Cristiano Ronaldo", "Cristiano Ronaldo"), ExactMatch);
        assert_eq!(profile_name_similarity("Cristiano Ronaldo", "Cristiano Ronaldo7"), ExactPlusExtra);
        assert_eq!(profile_name_similarity("Cristiano Ronaldo", "The Real Ronaldo"), WordSubset);
        assert_eq!(profile_name_similarity("Cristiano Ronaldo", "Lionel Messi"), Other);
        assert_eq!(profile_name_similarity("Cristiano Ronaldo", "cristiano  RONALDO"), ExactMatch);
        assert_eq!(profile_name_similarity("Shakira", "Shakira Fan Club"), ExactPlusExtra);
    }

    #[test]
    fn exact_match_outranks_containment() {
        // An exact match also contains the seed name textually.
        let name = "Katy Perry";
        assert!(name.contains(name));
        assert_eq!(profile_name_similarity(name, name), ProfileNameVerdict::ExactMatch);
    }
}
