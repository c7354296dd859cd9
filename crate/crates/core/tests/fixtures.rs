use std::collections::BTreeSet;
use std::fs::File;
use std::path::{Path, PathBuf};

use squadkit::datasource::{filter_variants, FixtureStore};
use squadkit::features::read_labeled_csv;
use squadkit::genmodels::{generate_all, validate_username, GenerationConfig, UsernameConstraints};
use squadkit::mentions::AccountCategory;
use squadkit::synth::training_set;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[test]
fn training_table_matches_generator() {
    let shipped = read_labeled_csv(File::open(fixtures().join("training.csv")).unwrap()).unwrap();
    assert_eq!(shipped, training_set());
}

#[test]
fn popular_seeds_are_unique_valid_and_categorized() {
    let mut rdr = csv::Reader::from_path(fixtures().join("popular_seeds.csv")).unwrap();
    let mut seen = BTreeSet::new();
    for row in rdr.records() {
        let row = row.unwrap();
        assert!(validate_username(&row[0], &UsernameConstraints::default()), "{}", &row[0]);
        assert!(seen.insert(row[0].to_ascii_lowercase()), "duplicate {}", &row[0]);
        row[1].parse::<AccountCategory>().unwrap();
    }
    assert_eq!(seen.len(), 97);
}

#[test]
fn demo_fixture_has_twelve_active_variants() {
    let store = FixtureStore::load(fixtures().join("demo")).unwrap();
    let variants = generate_all("cristiano", &GenerationConfig::default()).unwrap();
    let f = filter_variants(&variants, &store, 100).unwrap();
    assert_eq!(f.active.len(), 12);
    assert_eq!(f.suspended.len(), 2);
    assert!(f.unresolved.is_empty());
}
