//! Regenerates the synthetic training table and the demo model bundle.
//!
//! Run from the crate directory: `cargo run --release --example gen_fixtures`.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use squadkit::features::write_labeled_csv;
use squadkit::pipeline::{train_model, TrainOptions};
use squadkit::synth::training_set;

fn main() -> squadkit::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let examples = training_set();
    write_labeled_csv(&examples, BufWriter::new(File::create(root.join("training.csv"))?))?;

    let start = Instant::now();
    let out = train_model(&examples, &TrainOptions::default())?;
    out.bundle.save(&root.join("demo").join("model.txt"))?;
    eprintln!("trained in {:.2?}", start.elapsed());
    print!("{}", out.summary_json()?);
    Ok(())
}
