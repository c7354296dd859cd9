use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{cross_validate, CvMetric, Dataset, ForestModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfeStep {
    /// Column indices into the original dataset, ascending.
    pub columns: Vec<usize>,
    pub features: Vec<String>,
    pub cv_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfeResult {
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    /// One entry per subset size, largest first.
    pub trace: Vec<RfeStep>,
    /// Columns in the order they were removed.
    pub eliminated: Vec<usize>,
}

/// Recursive feature elimination scored by k-fold CV accuracy.
///
/// Each round fits `trainer` on the current columns and drops the one with
/// the lowest impurity importance (ties drop the later column). The subset
/// with the best CV accuracy wins; ties prefer fewer features, then the
/// lexicographically smaller name list.
pub fn select_features_rfe_cv<F>(data: &Dataset, folds: usize, cv_seed: u64, trainer: F) -> Result<RfeResult>
where
    F: Fn(&Dataset) -> Result<ForestModel> + Sync + Send,
{
    if !data.has_both_classes() {
        return Err(Error::invalid("feature elimination needs both classes"));
    }
    if data.n_features() == 0 {
        return Err(Error::invalid("dataset has no features"));
    }
    let names = data.feature_names();
    let mut columns: Vec<usize> = (0..data.n_features()).collect();
    let mut trace = Vec::new();
    let mut eliminated = Vec::new();
    loop {
        let view = data.select_features(&columns);
        let cv = cross_validate(&view, folds, cv_seed, CvMetric::Accuracy, &trainer)?;
        trace.push(RfeStep {
            columns: columns.clone(),
            features: columns.iter().map(|&c| names[c].clone()).collect(),
            cv_accuracy: cv.mean,
        });
        if columns.len() == 1 {
            break;
        }
        let model = trainer(&view)?;
        let imp = model.importances();
        let mut worst = 0;
        for i in 1..columns.len() {
            if imp[i] <= imp[worst] {
                worst = i;
            }
        }
        eliminated.push(columns.remove(worst));
    }

    let mut best = &trace[0];
    for step in &trace[1..] {
        let better = step.cv_accuracy > best.cv_accuracy
            || (step.cv_accuracy == best.cv_accuracy
                && (step.columns.len() < best.columns.len()
                    || (step.columns.len() == best.columns.len() && sorted(&step.features) < sorted(&best.features))));
        if better {
            best = step;
        }
    }
    Ok(RfeResult {
        selected: best.columns.clone(),
        selected_names: best.features.clone(),
        trace,
        eliminated,
    })
}

fn sorted(v: &[String]) -> Vec<&str> {
    let mut s: Vec<&str> = v.iter().map(String::as_str).collect();
    s.sort_unstable();
    s
}
