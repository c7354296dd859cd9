use serde::Serialize;

use super::ModelBundle;
use crate::error::{Error, Result};
use crate::features::{to_dataset, LabeledExample, ScalerParams};
use crate::learn::{
    default_grid, evaluate, smote, stratified_holdout, train_forest, tune_hyperparams, Dataset, EvalReport,
    HyperParams, TuningTrace,
};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOptions {
    /// Share of pairs held out for evaluation.
    pub test_fraction: f64,
    /// SMOTE neighbor count; 0 disables oversampling.
    pub smote_k: usize,
    pub folds: usize,
    pub grid: Vec<HyperParams>,
    pub rng_seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            test_fraction: 0.3,
            smote_k: 5,
            folds: 5,
            grid: default_grid(),
            rng_seed: 42,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub bundle: ModelBundle,
    pub best: HyperParams,
    pub trace: Vec<TuningTrace>,
    /// Metrics on the held-out split.
    pub report: EvalReport,
    pub train_size: usize,
    pub test_size: usize,
    pub synthetic_samples: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    best: &'a HyperParams,
    train_size: usize,
    test_size: usize,
    synthetic_samples: usize,
    report: &'a EvalReport,
}

impl TrainOutcome {
    pub fn summary_json(&self) -> Result<String> {
        let s = Summary {
            best: &self.best,
            train_size: self.train_size,
            test_size: self.test_size,
            synthetic_samples: self.synthetic_samples,
            report: &self.report,
        };
        Ok(serde_json::to_string_pretty(&s)? + "\n")
    }
}

fn scaled(data: &Dataset, scaler: &ScalerParams) -> Result<Dataset> {
    let rows = data.rows().iter().map(|r| scaler.apply_row(r)).collect::<Result<Vec<_>>>()?;
    Dataset::new(data.feature_names().to_vec(), rows, data.labels().to_vec())
}

/// Holdout split, min-max scaling fitted on the training part, SMOTE,
/// grid search by cross-validated F1 and a final fit on the balanced
/// training data.
pub fn train_model(examples: &[LabeledExample], opts: &TrainOptions) -> Result<TrainOutcome> {
    if !(opts.test_fraction > 0.0 && opts.test_fraction < 1.0) {
        return Err(Error::invalid("test fraction must lie strictly between 0 and 1"));
    }
    let data = to_dataset(examples)?;
    if !data.has_both_classes() {
        return Err(Error::invalid("training data needs both classes"));
    }
    let (train_idx, test_idx) = stratified_holdout(data.labels(), opts.test_fraction, opts.rng_seed)?;
    let train_raw = data.subset(&train_idx);
    let scaler = ScalerParams::fit_rows(train_raw.rows())?;
    let train = scaled(&train_raw, &scaler)?;
    let test = scaled(&data.subset(&test_idx), &scaler)?;

    let (balanced, synthetic_samples) = if opts.smote_k > 0 {
        let out = smote(&train, opts.smote_k, opts.rng_seed)?;
        let n = out.origins.len();
        (out.data, n)
    } else {
        (train, 0)
    };
    let (best, trace) = tune_hyperparams(&balanced, &opts.grid, opts.folds, opts.rng_seed)?;
    let forest = train_forest(&balanced, &best, opts.rng_seed)?;
    let report = evaluate(&forest, &test)?;
    Ok(TrainOutcome {
        bundle: ModelBundle::new(forest, scaler)?,
        best,
        trace,
        report,
        train_size: train_idx.len(),
        test_size: test_idx.len(),
        synthetic_samples,
    })
}
