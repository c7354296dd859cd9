use std::io::{Read, Write};

use super::{feature_names, FeatureVector, LabeledExample, FEATURE_NAMES, N_FEATURES};
use crate::error::{Error, Result};
use crate::learn::{Dataset, Label};

/// First line of every labeled feature file.
pub const LABELED_CSV_COMMENT: &str = "# columns: seed,variant,profile_name_ed,username_ed,image_score,image_binary,friendship,friends_count,tweet_count,bio_similarity,url_similarity,location,retweets_count,is_private,label";

fn header() -> Vec<&'static str> {
    let mut h = vec!["seed", "variant"];
    h.extend(FEATURE_NAMES);
    h.push("label");
    h
}

pub fn write_labeled_csv<W: Write>(examples: &[LabeledExample], mut out: W) -> Result<()> {
    writeln!(out, "{LABELED_CSV_COMMENT}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for ex in examples {
        let mut rec = vec![ex.seed.clone(), ex.variant.clone()];
        rec.extend(ex.features.to_array().iter().map(|v| format!("{v:?}")));
        rec.push(ex.label.as_str().to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a labeled feature file. Lines starting with `#` are skipped and the
/// header row must list the columns in the fixed order.
pub fn read_labeled_csv<R: Read>(input: R) -> Result<Vec<LabeledExample>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let got: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if got != header() {
        return Err(Error::data(format!("unexpected header {got:?}")));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut values = [0.0; N_FEATURES];
        for (j, v) in values.iter_mut().enumerate() {
            let cell = rec.get(2 + j).unwrap_or_default().trim();
            *v = cell
                .parse()
                .map_err(|_| Error::data(format!("row {line}: bad {} value {cell:?}", FEATURE_NAMES[j])))?;
        }
        let label: Label = rec.get(2 + N_FEATURES).unwrap_or_default().parse()?;
        out.push(LabeledExample {
            seed: rec.get(0).unwrap_or_default().to_string(),
            variant: rec.get(1).unwrap_or_default().to_string(),
            features: FeatureVector::from_array(values),
            label,
        });
    }
    Ok(out)
}

pub fn to_dataset(examples: &[LabeledExample]) -> Result<Dataset> {
    Dataset::new(
        feature_names(),
        examples.iter().map(|e| e.features.to_array().to_vec()).collect(),
        examples.iter().map(|e| e.label).collect(),
    )
}
