//! Username variant generation.
//!
//! Ten primitive string models rewrite a seed username one edit at a time.
//! Each model can be self-repeated (applied again to its own outputs up to a
//! depth bound and the platform length limit) and pairs of models can be
//! stacked, feeding every output of the first into the second. All outputs
//! are filtered through [`UsernameConstraints`] and deduplicated
//! case-insensitively, since platform usernames are case-insensitive
//! identifiers.

mod closure;
pub mod export;
mod primitives;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use closure::{generate_all, generate_batch, self_repeat, stack_models};
pub use primitives::apply_primitive;

pub(crate) const VOWELS: [u8; 5] = *b"aeiou";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenerationModelId {
    VowelInsertion,
    DoubleCharInsertion,
    NumberInsertion,
    UnderscoreInsertion,
    VowelDeletion,
    DoubleCharDeletion,
    NumberDeletion,
    UnderscoreDeletion,
    VowelSubstitution,
    Misspellings,
}

impl GenerationModelId {
    pub const ALL: [GenerationModelId; 10] = [
        GenerationModelId::VowelInsertion,
        GenerationModelId::DoubleCharInsertion,
        GenerationModelId::NumberInsertion,
        GenerationModelId::UnderscoreInsertion,
        GenerationModelId::VowelDeletion,
        GenerationModelId::DoubleCharDeletion,
        GenerationModelId::NumberDeletion,
        GenerationModelId::UnderscoreDeletion,
        GenerationModelId::VowelSubstitution,
        GenerationModelId::Misspellings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenerationModelId::VowelInsertion => "vowel-insertion",
            GenerationModelId::DoubleCharInsertion => "double-char-insertion",
            GenerationModelId::NumberInsertion => "number-insertion",
            GenerationModelId::UnderscoreInsertion => "underscore-insertion",
            GenerationModelId::VowelDeletion => "vowel-deletion",
            GenerationModelId::DoubleCharDeletion => "double-char-deletion",
            GenerationModelId::NumberDeletion => "number-deletion",
            GenerationModelId::UnderscoreDeletion => "underscore-deletion",
            GenerationModelId::VowelSubstitution => "vowel-substitution",
            GenerationModelId::Misspellings => "misspellings",
        }
    }

    /// True for models whose single application is exactly one character
    /// insertion, deletion or substitution.
    pub fn is_single_char_edit(self) -> bool {
        !matches!(
            self,
            GenerationModelId::DoubleCharDeletion | GenerationModelId::Misspellings
        )
    }
}

impl fmt::Display for GenerationModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenerationModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_lowercase().replace('_', "-");
        GenerationModelId::ALL
            .iter()
            .copied()
            .find(|m| m.name() == wanted)
            .ok_or_else(|| Error::invalid(format!("unknown generation model `{s}`")))
    }
}

/// Set of allowed ASCII characters, stored as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Charset(u128);

impl Charset {
    /// Letters, digits and underscore.
    pub fn username() -> Self {
        Self::from_chars("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")
    }

    /// Non-ASCII characters are ignored.
    pub fn from_chars(chars: &str) -> Self {
        let mut mask = 0u128;
        for b in chars.bytes().filter(u8::is_ascii) {
            mask |= 1u128 << b;
        }
        Charset(mask)
    }

    pub fn contains(&self, c: char) -> bool {
        c.is_ascii() && self.0 & (1u128 << (c as u32)) != 0
    }

    pub(crate) fn contains_byte(&self, b: u8) -> bool {
        b < 128 && self.0 & (1u128 << b) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }
}

impl Default for Charset {
    fn default() -> Self {
        Self::username()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UsernameConstraints {
    pub max_len: usize,
    pub min_len: usize,
    pub charset: Charset,
    pub case_insensitive_identity: bool,
}

impl Default for UsernameConstraints {
    fn default() -> Self {
        Self {
            max_len: 15,
            min_len: 1,
            charset: Charset::username(),
            case_insensitive_identity: true,
        }
    }
}

impl UsernameConstraints {
    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_len < 1 || self.max_len < self.min_len {
            return Err(Error::Config(format!(
                "username length bounds must satisfy max_len >= min_len >= 1 (got {}..={})",
                self.min_len, self.max_len
            )));
        }
        if self.charset.is_empty() {
            return Err(Error::Config("username charset is empty".into()));
        }
        Ok(())
    }

    /// Identity key used for deduplication and seed comparisons.
    pub fn identity_key(&self, username: &str) -> String {
        if self.case_insensitive_identity {
            username.to_ascii_lowercase()
        } else {
            username.to_string()
        }
    }
}

pub fn validate_username(candidate: &str, constraints: &UsernameConstraints) -> bool {
    let len = candidate.chars().count();
    len >= constraints.min_len
        && len <= constraints.max_len
        && candidate.chars().all(|c| constraints.charset.contains(c))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisspellingRule {
    pub pattern: String,
    pub replacement: String,
}

/// Ordered substring rewrites applied by the misspelling model. Patterns
/// match case-insensitively.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MisspellingTable {
    rules: Vec<MisspellingRule>,
}

impl MisspellingTable {
    pub fn new(rules: Vec<MisspellingRule>) -> Result<Self> {
        for r in &rules {
            if r.pattern.is_empty() {
                return Err(Error::Config("misspelling pattern must be nonempty".into()));
            }
            if r.pattern.eq_ignore_ascii_case(&r.replacement) {
                return Err(Error::Config(format!(
                    "misspelling rule `{}` maps a pattern to itself",
                    r.pattern
                )));
            }
            if !r.pattern.is_ascii() || !r.replacement.is_ascii() {
                return Err(Error::Config(format!(
                    "misspelling rule `{}` -> `{}` is not ASCII",
                    r.pattern, r.replacement
                )));
            }
        }
        let rules = rules
            .into_iter()
            .map(|r| MisspellingRule {
                pattern: r.pattern.to_ascii_lowercase(),
                replacement: r.replacement.to_ascii_lowercase(),
            })
            .collect();
        Ok(Self { rules })
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(p, r)| MisspellingRule {
                    pattern: p.to_string(),
                    replacement: r.to_string(),
                })
                .collect(),
        )
    }

    pub fn rules(&self) -> &[MisspellingRule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn check_charset(&self, charset: &Charset) -> Result<()> {
        for r in &self.rules {
            if let Some(c) = r.replacement.chars().find(|c| !charset.contains(*c)) {
                return Err(Error::Config(format!(
                    "misspelling replacement `{}` uses `{c}` outside the username charset",
                    r.replacement
                )));
            }
        }
        Ok(())
    }
}

impl Default for MisspellingTable {
    /// Common keyboard, phonetic and glyph confusions.
    fn default() -> Self {
        Self::from_pairs(&[
            ("ck", "k"),
            ("ph", "f"),
            ("ie", "ei"),
            ("ei", "ie"),
            ("qu", "kw"),
            ("rn", "m"),
            ("m", "rn"),
            ("o", "0"),
            ("0", "o"),
            ("l", "1"),
            ("1", "l"),
            ("i", "l"),
            ("l", "i"),
            ("s", "z"),
            ("c", "k"),
            ("ll", "l"),
            ("ss", "s"),
            ("tt", "t"),
        ])
        .expect("default misspelling table is valid")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationConfig {
    pub enabled_models: BTreeSet<GenerationModelId>,
    pub self_repetition: bool,
    pub stacking: bool,
    /// Ordered (first, second) pairs used for stacking.
    pub stacking_pairs: BTreeSet<(GenerationModelId, GenerationModelId)>,
    pub misspelling_table: MisspellingTable,
    pub constraints: UsernameConstraints,
    /// Maximum number of applications of one model under self-repetition.
    pub max_depth: usize,
    /// Maximum total number of applications along a stacked chain.
    pub max_stack_depth: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self::with_models(GenerationModelId::ALL)
    }
}

impl GenerationConfig {
    /// Config with the given models enabled, self-repetition and stacking on,
    /// and every ordered pair of distinct enabled models stacked.
    pub fn with_models(models: impl IntoIterator<Item = GenerationModelId>) -> Self {
        let enabled_models: BTreeSet<_> = models.into_iter().collect();
        let stacking_pairs = all_pairs(&enabled_models);
        Self {
            enabled_models,
            self_repetition: true,
            stacking: true,
            stacking_pairs,
            misspelling_table: MisspellingTable::default(),
            constraints: UsernameConstraints::default(),
            max_depth: 3,
            max_stack_depth: 3,
        }
    }

    /// Primitive models only: one application each, no stacking.
    pub fn primitives_only(mut self) -> Self {
        self.self_repetition = false;
        self.stacking = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.constraints.validate()?;
        self.misspelling_table.check_charset(&self.constraints.charset)?;
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if self.stacking && self.max_stack_depth < 2 {
            return Err(Error::Config("max_stack_depth must be at least 2".into()));
        }
        for &(a, b) in &self.stacking_pairs {
            if a == b {
                return Err(Error::Config(format!("stacking pair ({a}, {a}) repeats a model")));
            }
            if !self.enabled_models.contains(&a) || !self.enabled_models.contains(&b) {
                return Err(Error::Config(format!(
                    "stacking pair ({a}, {b}) references a disabled model"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn all_pairs(
    models: &BTreeSet<GenerationModelId>,
) -> BTreeSet<(GenerationModelId, GenerationModelId)> {
    models
        .iter()
        .flat_map(|&a| models.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
        .collect()
}

/// A generated username with the chain of models that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub username: String,
    pub seed: String,
    pub provenance: Vec<GenerationModelId>,
    /// Total number of primitive applications along the provenance chain.
    pub repetition_depth: usize,
    pub edit_distance: usize,
}

impl VariantRecord {
    pub fn provenance_label(&self) -> String {
        self.provenance
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join("+")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_usernames() {
        let c = UsernameConstraints::default();
        assert!(validate_username("NBA_", &c));
        assert!(!validate_username("", &c));
        assert!(!validate_username("abcdefghij123456", &c));
        assert!(validate_username("abcdefghij12345", &c));
        assert!(!validate_username("nba-official", &c));
        assert!(!validate_username("naïve", &c));
    }

    #[test]
    fn ten_models() {
        assert_eq!(GenerationModelId::ALL.len(), 10);
        let names: BTreeSet<_> = GenerationModelId::ALL.iter().map(|m| m.name()).collect();
        assert_eq!(names.len(), 10);
        for m in GenerationModelId::ALL {
            assert_eq!(m.name().parse::<GenerationModelId>().unwrap(), m);
        }
        assert!("bit-flip".parse::<GenerationModelId>().is_err());
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = GenerationConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.stacking_pairs.len(), 90);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = GenerationConfig::default();
        cfg.stacking_pairs
            .insert((GenerationModelId::VowelDeletion, GenerationModelId::VowelDeletion));
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));

        let mut cfg = GenerationConfig::with_models([GenerationModelId::VowelDeletion]);
        cfg.stacking_pairs
            .insert((GenerationModelId::VowelDeletion, GenerationModelId::NumberInsertion));
        assert!(cfg.validate().is_err());

        let cfg = GenerationConfig {
            constraints: UsernameConstraints {
                min_len: 4,
                max_len: 3,
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(cfg.validate().is_err());

        assert!(MisspellingTable::from_pairs(&[("", "a")]).is_err());
        assert!(MisspellingTable::from_pairs(&[("ab", "AB")]).is_err());
        let cfg = GenerationConfig {
            misspelling_table: MisspellingTable::from_pairs(&[("a", "-")]).unwrap(),
            ..GenerationConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
