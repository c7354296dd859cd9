//! End-to-end detection: generate variants, keep the ones that exist, score
//! each (seed, variant) pair with a trained forest and demote self-declared
//! fan or parody accounts.

mod bundle;
mod config;
mod report;
mod train;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datasource::{filter_variants, lookup_accounts, DataSource, LookupOutcome};
use crate::error::{Error, Result};
use crate::exec;
use crate::features::{apply_normalizer, extract_features, AccountRecord, ExtractOptions, FeatureVector};
use crate::genmodels::generate_all;
use crate::mentions::{ed_bucket, ED_BUCKETS};
use crate::similarity::{EmbeddingStore, EmojiMap};

pub use bundle::ModelBundle;
pub use config::{default_keywords, GenerationSettings, PipelineConfig};
pub use report::{report_render, ReportFormat};
pub use train::{train_model, TrainOptions, TrainOutcome};

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// True when any keyword occurs in `bio` as a whole word (or word sequence),
/// ignoring case.
pub fn post_filter(bio: &str, keywords: &[String]) -> bool {
    let bio_words = words(bio);
    keywords.iter().any(|k| {
        let kw = words(k);
        !kw.is_empty() && bio_words.windows(kw.len()).any(|w| w == kw.as_slice())
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanTotals {
    pub generated: usize,
    pub active: usize,
    pub suspended: usize,
    pub not_found: usize,
    pub unresolved: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub variant: String,
    pub probability: f64,
    /// Unscaled features.
    pub features: FeatureVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub seed: String,
    pub totals: ScanTotals,
    /// Flagged pairs, highest probability first.
    pub suspicious_pairs: Vec<ScoredPair>,
    pub benign_count: usize,
    pub post_filtered_count: usize,
    /// Variants demoted by the keyword post-filter.
    pub post_filtered: Vec<String>,
    /// Active pairs skipped because a face embedding was required but absent.
    pub skipped_no_face: usize,
    /// Pairs classified with an unknown friendship value.
    pub incomplete_pairs: usize,
    /// Active variants per seed edit-distance bucket.
    pub ed_histogram: BTreeMap<String, usize>,
    pub threshold: f64,
}

impl ScanReport {
    pub fn classified(&self) -> usize {
        self.suspicious_pairs.len() + self.benign_count + self.post_filtered_count
    }
}

fn has_face(r: &AccountRecord, store: &EmbeddingStore) -> bool {
    r.embedding_ref.as_deref().and_then(|id| store.vector(id)).is_some()
}

/// Runs the full detection pipeline for one seed.
pub fn scan(
    seed: &str,
    ds: &dyn DataSource,
    embeddings: &EmbeddingStore,
    bundle: &ModelBundle,
    config: &PipelineConfig,
) -> Result<ScanReport> {
    config.validate()?;
    let gen = config.generation.to_config()?;
    let seed_rec = match lookup_accounts(ds, &[seed.to_string()], 1)?.entries.remove(seed) {
        Some(LookupOutcome::Active(rec)) => rec,
        Some(LookupOutcome::Failed(msg)) => return Err(Error::Backend(msg)),
        Some(other) => {
            let status = other.status().map_or("unknown".to_string(), |s| s.to_string());
            return Err(Error::invalid(format!("seed {seed} is {status}")));
        }
        None => return Err(Error::Backend(format!("no lookup result for {seed}"))),
    };

    let variants = generate_all(seed, &gen)?;
    let filtered = filter_variants(&variants, ds, config.lookup_batch)?;
    let totals = ScanTotals {
        generated: variants.len(),
        active: filtered.active.len(),
        suspended: filtered.suspended.len(),
        not_found: filtered.not_found.len(),
        unresolved: filtered.unresolved.len(),
    };

    let mut ed_histogram: BTreeMap<String, usize> = ED_BUCKETS.iter().map(|b| (b.to_string(), 0)).collect();
    for (v, _) in &filtered.active {
        *ed_histogram.get_mut(ED_BUCKETS[ed_bucket(v.edit_distance)]).expect("bucket exists") += 1;
    }

    let opts = ExtractOptions { image_threshold: config.image_threshold, emoji: EmojiMap::default() };
    let face_ok = |r: &AccountRecord| !config.face_required || has_face(r, embeddings);
    let scored = exec::map(&filtered.active, |(_, rec)| -> Result<Option<(f64, FeatureVector, bool)>> {
        if !face_ok(&seed_rec) || !face_ok(rec) {
            return Ok(None);
        }
        let x = extract_features(&seed_rec, rec, ds, embeddings, &opts)?;
        let scaled = apply_normalizer(&bundle.scaler, &x.features);
        let p = bundle.forest.predict_proba(&scaled.to_array())?;
        Ok(Some((p, x.features, x.incomplete)))
    });

    let mut report = ScanReport {
        seed: seed_rec.username.clone(),
        totals,
        suspicious_pairs: Vec::new(),
        benign_count: 0,
        post_filtered_count: 0,
        post_filtered: Vec::new(),
        skipped_no_face: 0,
        incomplete_pairs: 0,
        ed_histogram,
        threshold: config.threshold,
    };
    for ((_, rec), s) in filtered.active.iter().zip(scored) {
        let Some((probability, features, incomplete)) = s? else {
            report.skipped_no_face += 1;
            continue;
        };
        report.incomplete_pairs += usize::from(incomplete);
        if probability < config.threshold {
            report.benign_count += 1;
        } else if post_filter(&rec.bio, &config.post_filter_keywords) {
            report.post_filtered_count += 1;
            report.post_filtered.push(rec.username.clone());
        } else {
            report.suspicious_pairs.push(ScoredPair { variant: rec.username.clone(), probability, features });
        }
    }
    report
        .suspicious_pairs
        .sort_by(|a, b| b.probability.total_cmp(&a.probability).then_with(|| a.variant.cmp(&b.variant)));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kw() -> Vec<String> {
        default_keywords()
    }

    #[test]
    fn keyword_rule() {
        assert!(post_filter("Parody account — not affiliated", &kw()));
        assert!(post_filter("Biggest FAN of the king", &kw()));
        assert!(!post_filter("Fantastic news daily", &kw()));
        assert!(!post_filter("", &kw()));
        assert!(post_filter("#1 fan!", &kw()));
        assert!(!post_filter("fans club", &kw()));
        assert!(post_filter("not the real one", &["real one".to_string()]));
        assert!(!post_filter("anything", &[]));
    }

    #[test]
    fn keyword_oracle_agrees() {
        // Whole-word match via a regex with explicit word boundaries.
        let re = regex::Regex::new(r"(?i)(^|[^\p{L}\p{N}])(fan|parody)($|[^\p{L}\p{N}])").unwrap();
        for bio in ["fan", "fanatic", "a parody.", "parodyaccount", "FAN-made", "über fan", "x_fan"] {
            assert_eq!(post_filter(bio, &kw()), re.is_match(bio), "{bio}");
        }
    }
}
