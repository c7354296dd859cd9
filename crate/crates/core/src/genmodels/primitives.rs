use std::collections::{BTreeSet, HashSet};

use super::{GenerationConfig, GenerationModelId, MisspellingTable, UsernameConstraints, VOWELS};

fn is_vowel(b: u8) -> bool {
    VOWELS.contains(&b.to_ascii_lowercase())
}

fn with_case_of(template: u8, b: u8) -> u8 {
    if template.is_ascii_uppercase() {
        b.to_ascii_uppercase()
    } else {
        b
    }
}

fn inserted(s: &[u8], at: usize, b: u8) -> Vec<u8> {
    let mut v = Vec::with_capacity(s.len() + 1);
    v.extend_from_slice(&s[..at]);
    v.push(b);
    v.extend_from_slice(&s[at..]);
    v
}

fn removed(s: &[u8], at: usize, n: usize) -> Vec<u8> {
    let mut v = Vec::with_capacity(s.len() - n);
    v.extend_from_slice(&s[..at]);
    v.extend_from_slice(&s[at + n..]);
    v
}

/// Pushes every single-application rewrite of `s`, unfiltered. `s` must be
/// ASCII; outputs may repeat.
pub(crate) fn expand_raw(
    model: GenerationModelId,
    s: &[u8],
    table: &MisspellingTable,
    out: &mut Vec<Vec<u8>>,
) {
    use GenerationModelId::*;
    let n = s.len();
    match model {
        VowelInsertion => {
            for i in (0..n).filter(|&i| is_vowel(s[i])) {
                out.push(inserted(s, i + 1, s[i].to_ascii_lowercase()));
            }
        }
        DoubleCharInsertion => {
            for i in 1..n {
                if s[i - 1].eq_ignore_ascii_case(&s[i]) {
                    out.push(inserted(s, i + 1, s[i]));
                }
            }
        }
        NumberInsertion => {
            for d in b'0'..=b'9' {
                out.push(inserted(s, 0, d));
                out.push(inserted(s, n, d));
            }
        }
        UnderscoreInsertion => {
            out.push(inserted(s, 0, b'_'));
            out.push(inserted(s, n, b'_'));
        }
        VowelDeletion => {
            for i in (0..n).filter(|&i| is_vowel(s[i])) {
                out.push(removed(s, i, 1));
            }
        }
        DoubleCharDeletion => {
            for i in 1..n {
                if s[i - 1].eq_ignore_ascii_case(&s[i]) {
                    out.push(removed(s, i - 1, 2));
                }
            }
        }
        NumberDeletion => {
            if n > 0 && s[0].is_ascii_digit() {
                out.push(removed(s, 0, 1));
            }
            if n > 1 && s[n - 1].is_ascii_digit() {
                out.push(removed(s, n - 1, 1));
            }
        }
        UnderscoreDeletion => {
            for i in (0..n).filter(|&i| s[i] == b'_') {
                out.push(removed(s, i, 1));
            }
        }
        VowelSubstitution => {
            for i in (0..n).filter(|&i| is_vowel(s[i])) {
                let current = s[i].to_ascii_lowercase();
                for &v in VOWELS.iter().filter(|&&v| v != current) {
                    let mut t = s.to_vec();
                    t[i] = with_case_of(s[i], v);
                    out.push(t);
                }
            }
        }
        Misspellings => {
            for rule in table.rules() {
                let pat = rule.pattern.as_bytes();
                if pat.len() > n {
                    continue;
                }
                for start in 0..=(n - pat.len()) {
                    if !s[start..start + pat.len()].eq_ignore_ascii_case(pat) {
                        continue;
                    }
                    let mut t = Vec::with_capacity(n - pat.len() + rule.replacement.len());
                    t.extend_from_slice(&s[..start]);
                    t.extend(rule.replacement.bytes().enumerate().map(|(j, b)| {
                        if j == 0 {
                            with_case_of(s[start], b)
                        } else {
                            b
                        }
                    }));
                    t.extend_from_slice(&s[start + pat.len()..]);
                    out.push(t);
                }
            }
        }
    }
}

pub(crate) fn is_valid_bytes(s: &[u8], c: &UsernameConstraints) -> bool {
    s.len() >= c.min_len && s.len() <= c.max_len && s.iter().all(|&b| c.charset.contains_byte(b))
}

/// Identity comparison on raw bytes, honouring the case-insensitivity flag.
pub(crate) fn same_identity(a: &[u8], b: &[u8], c: &UsernameConstraints) -> bool {
    if c.case_insensitive_identity {
        a.eq_ignore_ascii_case(b)
    } else {
        a == b
    }
}

/// Returns every valid single-application output of `model` on `username`,
/// excluding the input itself. Outputs differing only by case (under
/// case-insensitive identity) are collapsed to the lexicographically
/// smallest spelling.
pub fn apply_primitive(
    model: GenerationModelId,
    username: &str,
    config: &GenerationConfig,
) -> BTreeSet<String> {
    let c = &config.constraints;
    if !username.is_ascii() {
        return BTreeSet::new();
    }
    let mut raw = Vec::new();
    expand_raw(model, username.as_bytes(), &config.misspelling_table, &mut raw);

    let mut candidates: Vec<String> = raw
        .into_iter()
        .filter(|v| is_valid_bytes(v, c) && !same_identity(v, username.as_bytes(), c))
        .map(|v| String::from_utf8(v).expect("ascii rewrite of ascii input"))
        .collect();
    candidates.sort();
    let mut seen = HashSet::new();
    candidates
        .into_iter()
        .filter(|v| seen.insert(c.identity_key(v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmodels::GenerationModelId::*;
    use crate::similarity::levenshtein;

    fn apply(model: GenerationModelId, s: &str) -> BTreeSet<String> {
        apply_primitive(model, s, &GenerationConfig::default())
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn documented_examples() {
        assert!(apply(VowelInsertion, "AxlRose").contains("AaxlRose"));
        assert!(apply(DoubleCharInsertion, "CNNbrk").contains("CNNNbrk"));
        let numbers = apply(NumberInsertion, "Cristiano");
        assert!(numbers.contains("9Cristiano"));
        for d in 0..=9 {
            assert!(numbers.contains(&format!("Cristiano{d}")));
        }
        assert_eq!(numbers.len(), 20);
        assert_eq!(apply(UnderscoreInsertion, "NBA"), set(&["NBA_", "_NBA"]));
        assert!(apply(VowelDeletion, "BarackObama").contains("BrackObama"));
        assert!(apply(DoubleCharDeletion, "Twitter").contains("Twier"));
        assert!(apply(NumberDeletion, "AndresIniesta8").contains("AndresIniesta"));
        assert_eq!(apply(UnderscoreDeletion, "Ricky_Martin"), set(&["RickyMartin"]));
        assert!(apply(VowelSubstitution, "BarackObama").contains("BerackObama"));
        assert!(apply(Misspellings, "BarackObama").contains("BarakObama"));
    }

    #[test]
    fn no_site_means_empty() {
        assert!(apply(NumberDeletion, "cristiano").is_empty());
        assert!(apply(UnderscoreDeletion, "cristiano").is_empty());
        assert!(apply(DoubleCharInsertion, "abc").is_empty());
        assert!(apply(VowelInsertion, "xkcd").is_empty());
    }

    #[test]
    fn number_deletion_is_end_anchored() {
        assert_eq!(apply(NumberDeletion, "1ab2cd3"), set(&["1ab2cd", "ab2cd3"]));
        // The last digit is never removed from a single-character name.
        assert!(apply(NumberDeletion, "7").is_empty());
    }

    #[test]
    fn length_limit_blocks_insertions() {
        let full = "abcdefghijklmno";
        assert!(apply(NumberInsertion, full).is_empty());
        assert!(apply(UnderscoreInsertion, full).is_empty());
        assert_eq!(apply(VowelDeletion, full).len(), 4);
    }

    #[test]
    fn substitution_preserves_case() {
        let out = apply(VowelSubstitution, "Ab");
        assert_eq!(out, set(&["Eb", "Ib", "Ob", "Ub"]));
    }

    #[test]
    fn single_char_models_are_distance_one() {
        for model in GenerationModelId::ALL.into_iter().filter(|m| m.is_single_char_edit()) {
            for seed in ["BarackObama", "Jimmyfallon", "a_b_c9", "CNNbrk", "taylorswift13"] {
                for v in apply(model, seed) {
                    assert_eq!(levenshtein(seed, &v), 1, "{model} {seed} -> {v}");
                }
            }
        }
        for v in apply(DoubleCharDeletion, "Twitter") {
            assert_eq!(levenshtein("Twitter", &v), 2);
        }
    }

    #[test]
    fn outputs_exclude_input_case_insensitively() {
        let cfg = GenerationConfig {
            misspelling_table: MisspellingTable::from_pairs(&[("a", "b")]).unwrap(),
            ..Default::default()
        };
        for model in GenerationModelId::ALL {
            for v in apply_primitive(model, "Abba", &cfg) {
                assert!(!v.eq_ignore_ascii_case("abba"));
            }
        }
    }
}
