//! Deterministic synthetic labeled pairs for training and benchmarking.
//!
//! Suspicious pairs copy the seed's display name and picture and keep a low
//! profile; benign pairs are unrelated accounts that merely share a username
//! variant. Every feature carries some signal and the classes overlap only
//! at the margins.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::features::{FeatureVector, LabeledExample, MISSING_IMAGE_SCORE};
use crate::learn::Label;
use crate::similarity::DEFAULT_IMAGE_THRESHOLD;

pub const TRAINING_SEED: u64 = 1378;
pub const TRAINING_SUSPICIOUS: usize = 540;
pub const TRAINING_BENIGN: usize = 838;

const SEEDS: [&str; 16] = [
    "cristiano", "barackobama", "katyperry", "justinbieber", "rihanna", "taylorswift13", "ladygaga", "theellenshow",
    "youtube", "jtimberlake", "kimkardashian", "selenagomez", "cnnbrk", "nasa", "kaka", "nba",
];

fn pick<R: Rng>(rng: &mut R, weights: &[(f64, f64)]) -> f64 {
    let mut u = rng.random::<f64>();
    for &(value, w) in weights {
        if u < w {
            return value;
        }
        u -= w;
    }
    weights.last().expect("nonempty weights").0
}

fn count<R: Rng>(rng: &mut R, mu: f64, sigma: f64) -> f64 {
    LogNormal::new(mu, sigma).expect("valid lognormal").sample(rng).round()
}

fn flag<R: Rng>(rng: &mut R, p: f64) -> f64 {
    if rng.random_bool(p) {
        1.0
    } else {
        0.0
    }
}

fn image<R: Rng>(rng: &mut R, mean: f64, sd: f64, p_missing: f64) -> (f64, f64) {
    if rng.random_bool(p_missing) {
        return (MISSING_IMAGE_SCORE, 0.0);
    }
    let s = Normal::new(mean, sd).expect("valid normal").sample(rng).clamp(0.0, 2.0);
    (s, if s < DEFAULT_IMAGE_THRESHOLD { 1.0 } else { 0.0 })
}

fn suspicious<R: Rng>(rng: &mut R) -> FeatureVector {
    let (image_score, image_binary) = image(rng, 0.42, 0.16, 0.06);
    FeatureVector {
        profile_name_ed: pick(rng, &[(0.0, 0.45), (1.0, 0.2), (2.0, 0.12), (3.0, 0.08)]).max(if rng.random_bool(0.15) {
            rng.random_range(4..=12) as f64
        } else {
            0.0
        }),
        username_ed: pick(rng, &[(1.0, 0.62), (2.0, 0.28), (3.0, 0.1)]),
        image_score,
        image_binary,
        friendship: flag(rng, 0.12),
        friends_count: count(rng, 4.0, 1.2),
        tweet_count: count(rng, 4.5, 1.5),
        bio_similarity: rng.random::<f64>() * 0.4,
        url_similarity: flag(rng, 0.35),
        location: flag(rng, 0.5),
        retweets_count: count(rng, 2.5, 1.4),
        is_private: flag(rng, 0.03),
    }
}

fn benign<R: Rng>(rng: &mut R) -> FeatureVector {
    let (image_score, image_binary) = image(rng, 1.05, 0.22, 0.3);
    let profile_name_ed = if rng.random_bool(0.08) {
        rng.random_range(0..=3) as f64
    } else {
        rng.random_range(4..=20) as f64
    };
    FeatureVector {
        profile_name_ed,
        username_ed: pick(rng, &[(1.0, 0.42), (2.0, 0.35), (3.0, 0.23)]),
        image_score,
        image_binary,
        friendship: flag(rng, 0.02),
        friends_count: count(rng, 5.5, 1.3),
        tweet_count: count(rng, 6.5, 1.6),
        bio_similarity: if rng.random_bool(0.7) { 0.0 } else { rng.random::<f64>() * 0.2 },
        url_similarity: flag(rng, 0.04),
        location: flag(rng, 0.2),
        retweets_count: count(rng, 4.5, 1.8),
        is_private: flag(rng, 0.2),
    }
}

/// `n_suspicious` + `n_benign` pairs in a seeded shuffled order.
pub fn synthetic_pairs(n_suspicious: usize, n_benign: usize, seed: u64) -> Vec<LabeledExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Suspicious, n_suspicious)
        .chain(std::iter::repeat_n(Label::Benign, n_benign))
        .collect();
    for i in (1..labels.len()).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let features = match label {
                Label::Suspicious => suspicious(&mut rng),
                Label::Benign => benign(&mut rng),
            };
            let seed = SEEDS[i % SEEDS.len()];
            LabeledExample {
                seed: seed.to_string(),
                variant: format!("{seed}_{i}"),
                features,
                label,
            }
        })
        .collect()
}

/// The 1,378-pair training set shipped as `fixtures/training.csv`.
pub fn training_set() -> Vec<LabeledExample> {
    synthetic_pairs(TRAINING_SUSPICIOUS, TRAINING_BENIGN, TRAINING_SEED)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_sizes_and_determinism() {
        let a = training_set();
        assert_eq!(a.len(), 1378);
        assert_eq!(a.iter().filter(|e| e.label == Label::Suspicious).count(), 540);
        assert_eq!(a, training_set());
        assert_ne!(a, synthetic_pairs(540, 838, 1));
    }

    #[test]
    fn image_binary_consistent() {
        for e in training_set() {
            let f = e.features;
            assert_eq!(f.image_binary == 1.0, f.image_score < DEFAULT_IMAGE_THRESHOLD);
        }
    }
}
