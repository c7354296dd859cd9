use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap, HashSet};

use super::primitives::{expand_raw, is_valid_bytes};
use super::{validate_username, GenerationConfig, GenerationModelId, VariantRecord};
use crate::error::{Error, Result};
use crate::exec;
use crate::similarity::levenshtein;

type Found = Vec<(Vec<u8>, usize)>;

fn key_of(s: &[u8], config: &GenerationConfig) -> Vec<u8> {
    if config.constraints.case_insensitive_identity {
        s.to_ascii_lowercase()
    } else {
        s.to_vec()
    }
}

/// Breadth-first closure of one model from `start`, up to `depth_limit`
/// applications. Each output carries the minimum number of applications
/// that reaches it. `start` itself is never returned.
fn closure_raw(
    model: GenerationModelId,
    start: &[u8],
    depth_limit: usize,
    config: &GenerationConfig,
) -> Found {
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    seen.insert(key_of(start, config));
    let mut found = Vec::new();
    let mut frontier = vec![start.to_vec()];
    let mut scratch = Vec::new();
    for depth in 1..=depth_limit {
        let mut next = Vec::new();
        for s in &frontier {
            expand_raw(model, s, &config.misspelling_table, &mut scratch);
            for v in scratch.drain(..) {
                if is_valid_bytes(&v, &config.constraints) && seen.insert(key_of(&v, config)) {
                    found.push((v.clone(), depth));
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    found
}

fn stage_limit(config: &GenerationConfig) -> usize {
    if config.self_repetition {
        config.max_depth
    } else {
        1
    }
}

/// Second-stage outputs of `first` then `second`, keyed by identity with the
/// smallest total depth. The seed is excluded; nothing else is.
fn stack_raw(
    first: GenerationModelId,
    second: GenerationModelId,
    start: &[u8],
    config: &GenerationConfig,
) -> Found {
    let limit = stage_limit(config);
    let budget = config.max_stack_depth;
    let seed_key = key_of(start, config);
    let mut best: BTreeMap<Vec<u8>, (Vec<u8>, usize)> = BTreeMap::new();
    for (mid, d1) in closure_raw(first, start, limit.min(budget.saturating_sub(1)), config) {
        let remaining = limit.min(budget - d1);
        for (out, d2) in closure_raw(second, &mid, remaining, config) {
            let key = key_of(&out, config);
            if key == seed_key {
                continue;
            }
            let depth = d1 + d2;
            match best.get_mut(&key) {
                Some(slot) if slot.1 <= depth => {}
                Some(slot) => *slot = (out, depth),
                None => {
                    best.insert(key, (out, depth));
                }
            }
        }
    }
    best.into_values().collect()
}

fn to_record(
    seed: &str,
    username: Vec<u8>,
    provenance: Vec<GenerationModelId>,
    depth: usize,
    config: &GenerationConfig,
) -> VariantRecord {
    let username = String::from_utf8(username).expect("generated usernames are ascii");
    let edit_distance = levenshtein(
        &config.constraints.identity_key(seed),
        &config.constraints.identity_key(&username),
    );
    VariantRecord {
        username,
        seed: seed.to_string(),
        provenance,
        repetition_depth: depth,
        edit_distance,
    }
}

fn sort_records(records: &mut [VariantRecord], config: &GenerationConfig) {
    records.sort_by_cached_key(|r| {
        (config.constraints.identity_key(&r.username), r.username.clone())
    });
}

/// Self-repetition closure of one model: every username reachable by
/// `config.max_depth` or fewer successive applications, each labelled with
/// the minimum depth at which it appears.
pub fn self_repeat(
    model: GenerationModelId,
    username: &str,
    config: &GenerationConfig,
) -> Vec<VariantRecord> {
    if !validate_username(username, &config.constraints) {
        return Vec::new();
    }
    let mut records: Vec<_> = closure_raw(model, username.as_bytes(), config.max_depth, config)
        .into_iter()
        .map(|(v, d)| to_record(username, v, vec![model], d, config))
        .collect();
    sort_records(&mut records, config);
    records
}

/// Stacks `second` on every output of `first`, both self-repeated. Usernames
/// already produced by any enabled model on its own are left out.
pub fn stack_models(
    first: GenerationModelId,
    second: GenerationModelId,
    username: &str,
    config: &GenerationConfig,
) -> Result<Vec<VariantRecord>> {
    if first == second {
        return Err(Error::Config(format!("cannot stack {first} onto itself")));
    }
    if !validate_username(username, &config.constraints) {
        return Err(Error::invalid(format!("`{username}` is not a valid username")));
    }
    let limit = stage_limit(config);
    let single: HashSet<Vec<u8>> = config
        .enabled_models
        .iter()
        .flat_map(|&m| closure_raw(m, username.as_bytes(), limit, config))
        .map(|(v, _)| key_of(&v, config))
        .collect();
    let mut records: Vec<_> = stack_raw(first, second, username.as_bytes(), config)
        .into_iter()
        .filter(|(v, _)| !single.contains(&key_of(v, config)))
        .map(|(v, d)| to_record(username, v, vec![first, second], d, config))
        .collect();
    sort_records(&mut records, config);
    Ok(records)
}

enum Task {
    Single(GenerationModelId),
    Stack(GenerationModelId, GenerationModelId),
}

impl Task {
    fn provenance(&self) -> Vec<GenerationModelId> {
        match *self {
            Task::Single(m) => vec![m],
            Task::Stack(a, b) => vec![a, b],
        }
    }
}

/// Every enabled primitive output, self-repetition closure and stacked output
/// for `seed`, deduplicated by identity. When several routes reach the same
/// username the single-model route wins, then the earlier model in
/// declaration order. Records are sorted by identity key.
pub fn generate_all(seed: &str, config: &GenerationConfig) -> Result<Vec<VariantRecord>> {
    config.validate()?;
    if !validate_username(seed, &config.constraints) {
        return Err(Error::invalid(format!("seed `{seed}` is not a valid username")));
    }
    let limit = stage_limit(config);
    let mut tasks: Vec<Task> = config.enabled_models.iter().map(|&m| Task::Single(m)).collect();
    if config.stacking {
        tasks.extend(
            config
                .stacking_pairs
                .iter()
                .filter(|(a, b)| config.enabled_models.contains(a) && config.enabled_models.contains(b))
                .map(|&(a, b)| Task::Stack(a, b)),
        );
    }

    let outputs = exec::map(&tasks, |task| match *task {
        Task::Single(m) => closure_raw(m, seed.as_bytes(), limit, config),
        Task::Stack(a, b) => stack_raw(a, b, seed.as_bytes(), config),
    });

    let mut index: HashMap<Vec<u8>, ()> = HashMap::new();
    index.insert(key_of(seed.as_bytes(), config), ());
    let mut records = Vec::new();
    for (task, found) in tasks.iter().zip(outputs) {
        for (v, depth) in found {
            if let Entry::Vacant(slot) = index.entry(key_of(&v, config)) {
                slot.insert(());
                records.push(to_record(seed, v, task.provenance(), depth, config));
            }
        }
    }
    sort_records(&mut records, config);
    Ok(records)
}

/// Runs [`generate_all`] for every seed, in parallel when enabled. Results
/// are in seed order.
pub fn generate_batch(seeds: &[String], config: &GenerationConfig) -> Vec<Result<Vec<VariantRecord>>> {
    exec::map(seeds, |seed| generate_all(seed, config))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::genmodels::{apply_primitive, GenerationModelId::*, UsernameConstraints};

    fn names(records: &[VariantRecord]) -> BTreeSet<String> {
        records.iter().map(|r| r.username.clone()).collect()
    }

    #[test]
    fn jimmy_fallon_double_insertion() {
        let out = self_repeat(DoubleCharInsertion, "Jimmyfallon", &GenerationConfig::default());
        let rec = out.iter().find(|r| r.username == "Jimmmyfalllon").unwrap();
        assert_eq!(rec.repetition_depth, 2);
        // Not reachable by a single application.
        let once = apply_primitive(DoubleCharInsertion, "Jimmyfallon", &GenerationConfig::default());
        assert!(!once.contains("Jimmmyfalllon"));
    }

    #[test]
    fn cristiano_twenty_one() {
        let out = self_repeat(NumberInsertion, "Cristiano", &GenerationConfig::default());
        let rec = out.iter().find(|r| r.username == "Cristiano21").unwrap();
        assert_eq!(rec.repetition_depth, 2);
        assert_eq!(rec.edit_distance, 2);
    }

    #[test]
    fn underscore_deletion_closure() {
        let out = self_repeat(UnderscoreDeletion, "a_b_c", &GenerationConfig::default());
        let got: Vec<_> = out.iter().map(|r| (r.username.as_str(), r.repetition_depth)).collect();
        assert_eq!(got, vec![("a_bc", 1), ("ab_c", 1), ("abc", 2)]);
    }

    #[test]
    fn stacking_vowel_insertion_then_substitution() {
        let out = stack_models(VowelInsertion, VowelSubstitution, "BarackObama", &GenerationConfig::default())
            .unwrap();
        let got = names(&out);
        assert!(got.contains("BearackObama"));
        assert!(got.contains("BoarackObama"));
        assert!(out.iter().all(|r| r.provenance == vec![VowelInsertion, VowelSubstitution]));
    }

    #[test]
    fn underscore_round_trip_adds_nothing() {
        let out = stack_models(UnderscoreInsertion, UnderscoreDeletion, "NBA", &GenerationConfig::default())
            .unwrap();
        assert!(out.is_empty(), "{out:?}");
    }

    #[test]
    fn number_then_underscore() {
        let out = stack_models(NumberInsertion, UnderscoreInsertion, "kaka", &GenerationConfig::default())
            .unwrap();
        let got = names(&out);
        assert!(got.contains("_kaka1"));
        assert!(got.contains("1kaka_"));
    }

    #[test]
    fn stacking_same_model_is_rejected() {
        let err = stack_models(VowelDeletion, VowelDeletion, "nba", &GenerationConfig::default());
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn underscore_wrapping_oracle() {
        let mut cfg = GenerationConfig::with_models([UnderscoreInsertion]);
        cfg.constraints = UsernameConstraints::default().with_max_len(6);
        let got = names(&generate_all("nba", &cfg).unwrap());
        let mut want = BTreeSet::new();
        for lead in 0..=3 {
            for trail in 0..=3 {
                if (1..=3).contains(&(lead + trail)) {
                    want.insert(format!("{}nba{}", "_".repeat(lead), "_".repeat(trail)));
                }
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn nothing_enabled_generates_nothing() {
        let cfg = GenerationConfig::with_models([]);
        assert!(generate_all("cristiano", &cfg).unwrap().is_empty());
    }

    #[test]
    fn invalid_seed_is_rejected() {
        let cfg = GenerationConfig::default();
        assert!(matches!(generate_all("not valid!", &cfg), Err(Error::InvalidInput(_))));
        assert!(matches!(generate_all("", &cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn seed_never_regenerated() {
        let cfg = GenerationConfig::default();
        let out = generate_all("BarackObama", &cfg).unwrap();
        assert!(out.iter().all(|r| !r.username.eq_ignore_ascii_case("barackobama")));
        let keys: BTreeSet<_> = out.iter().map(|r| r.username.to_ascii_lowercase()).collect();
        assert_eq!(keys.len(), out.len());
    }
}
