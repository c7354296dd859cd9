use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use squadkit::genmodels::{
    apply_primitive, generate_all, self_repeat, validate_username, GenerationConfig, GenerationModelId,
};
use squadkit::similarity::levenshtein;

/// Independent breadth-first closure built from single applications.
fn bfs_closure(model: GenerationModelId, seed: &str, depth: usize, cfg: &GenerationConfig) -> BTreeMap<String, usize> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut keys: BTreeSet<String> = [seed.to_ascii_lowercase()].into();
    let mut frontier = vec![seed.to_string()];
    for d in 1..=depth {
        let mut next = Vec::new();
        for s in &frontier {
            for v in apply_primitive(model, s, cfg) {
                if keys.insert(v.to_ascii_lowercase()) {
                    seen.insert(v.clone(), d);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    seen
}

#[test]
fn self_repetition_matches_bfs_oracle() {
    let cfg = GenerationConfig::default();
    for seed in ["Jimmyfallon", "BarackObama", "NBA", "Ricky_Martin", "AndresIniesta8", "a1_b2"] {
        for model in GenerationModelId::ALL {
            let got: BTreeMap<String, usize> =
                self_repeat(model, seed, &cfg).into_iter().map(|r| (r.username, r.repetition_depth)).collect();
            let want = bfs_closure(model, seed, cfg.max_depth, &cfg);
            // Case-insensitive collisions may keep a different spelling; compare by identity.
            let lower = |m: &BTreeMap<String, usize>| -> BTreeMap<String, usize> {
                m.iter().map(|(k, v)| (k.to_ascii_lowercase(), *v)).collect()
            };
            assert_eq!(lower(&got), lower(&want), "{} on {seed}", model.name());
        }
    }
}

#[test]
fn full_generation_is_deterministic() {
    let cfg = GenerationConfig::default();
    assert_eq!(generate_all("cristiano", &cfg).unwrap(), generate_all("cristiano", &cfg).unwrap());
}

fn identities(seed: &str, cfg: &GenerationConfig) -> BTreeSet<String> {
    generate_all(seed, cfg).unwrap().into_iter().map(|r| r.username.to_ascii_lowercase()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outputs_are_valid_unique_and_exclude_seed(seed in "[A-Za-z0-9_]{1,9}") {
        let cfg = GenerationConfig::default();
        let out = generate_all(&seed, &cfg).unwrap();
        let mut keys = BTreeSet::new();
        for r in &out {
            prop_assert!(validate_username(&r.username, &cfg.constraints), "{}", r.username);
            prop_assert!(keys.insert(r.username.to_ascii_lowercase()), "duplicate {}", r.username);
            prop_assert_eq!(
                r.edit_distance,
                levenshtein(&seed.to_ascii_lowercase(), &r.username.to_ascii_lowercase())
            );
            prop_assert!(r.edit_distance >= 1);
            prop_assert!(r.repetition_depth >= 1 && r.repetition_depth <= cfg.max_stack_depth.max(cfg.max_depth));
        }
        prop_assert!(!keys.contains(&seed.to_ascii_lowercase()));
    }

    #[test]
    fn coverage_grows_with_repetition_and_stacking(seed in "[a-z0-9_]{1,8}") {
        let full = GenerationConfig::default();
        let mut no_stack = full.clone();
        no_stack.stacking = false;
        let primitives = full.clone().primitives_only();
        let (p, r, f) = (identities(&seed, &primitives), identities(&seed, &no_stack), identities(&seed, &full));
        prop_assert!(p.is_subset(&r));
        prop_assert!(r.is_subset(&f));
    }

    #[test]
    fn enabling_a_model_never_loses_variants(seed in "[a-z0-9_]{1,8}", skip in 0usize..10) {
        let full = GenerationConfig::default().primitives_only();
        let fewer = GenerationConfig::with_models(
            GenerationModelId::ALL.iter().copied().enumerate().filter(|(i, _)| *i != skip).map(|(_, m)| m),
        )
        .primitives_only();
        prop_assert!(identities(&seed, &fewer).is_subset(&identities(&seed, &full)));
    }
}
