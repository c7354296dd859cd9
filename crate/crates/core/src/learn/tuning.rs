//! Cross-validation and exhaustive grid search.

use serde::{Deserialize, Serialize};

use super::dataset::{complement, stratified_folds, Dataset};
use super::forest::{train_forest, ForestModel, HyperParams};
use super::metrics::evaluate;
use super::tree::MaxFeatures;
use crate::error::{Error, Result};
use crate::exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvMetric {
    Accuracy,
    /// F1 of the suspicious class.
    F1,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub fold_scores: Vec<f64>,
    pub mean: f64,
}

/// Stratified k-fold cross-validation of an arbitrary forest trainer.
pub fn cross_validate<F>(data: &Dataset, folds: usize, seed: u64, metric: CvMetric, fit: F) -> Result<CvScore>
where
    F: Fn(&Dataset) -> Result<ForestModel> + Sync + Send,
{
    let held_out = stratified_folds(data.labels(), folds, seed)?;
    let scores = exec::map(&held_out, |test_idx| -> Result<f64> {
        let train = data.subset(&complement(data.len(), test_idx));
        let test = data.subset(test_idx);
        let model = fit(&train)?;
        let report = evaluate(&model, &test)?;
        Ok(match metric {
            CvMetric::Accuracy => report.accuracy,
            CvMetric::F1 => report.f1,
        })
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(CvScore {
        fold_scores: scores,
        mean,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningTrace {
    pub hyperparams: HyperParams,
    pub cv_f1: CvScore,
}

/// Two values for each of the six tunable parameters.
pub fn default_grid() -> Vec<HyperParams> {
    let mut grid = Vec::new();
    for n_estimators in [25, 100] {
        for min_samples_split in [2, 6] {
            for min_samples_leaf in [1, 3] {
                for max_features in [MaxFeatures::Sqrt, MaxFeatures::Log2] {
                    for max_depth in [None, Some(8)] {
                        for bootstrap in [true, false] {
                            grid.push(HyperParams {
                                n_estimators,
                                min_samples_split,
                                min_samples_leaf,
                                max_features,
                                max_depth,
                                bootstrap,
                            });
                        }
                    }
                }
            }
        }
    }
    grid
}

/// A handful of configurations for quick runs.
pub fn small_grid() -> Vec<HyperParams> {
    let base = HyperParams::default();
    vec![
        HyperParams { n_estimators: 50, ..base },
        HyperParams { n_estimators: 50, max_depth: Some(8), ..base },
        HyperParams { n_estimators: 50, min_samples_leaf: 3, ..base },
        HyperParams { n_estimators: 50, max_features: MaxFeatures::All, ..base },
    ]
}

fn depth_rank(d: Option<usize>) -> usize {
    d.unwrap_or(usize::MAX)
}

/// Evaluates every grid point by mean cross-validated F1. Ties go to fewer
/// trees, then shallower `max_depth`, then grid order. The trace follows
/// grid order.
pub fn tune_hyperparams(
    data: &Dataset,
    grid: &[HyperParams],
    folds: usize,
    rng_seed: u64,
) -> Result<(HyperParams, Vec<TuningTrace>)> {
    if grid.is_empty() {
        return Err(Error::invalid("hyperparameter grid is empty"));
    }
    for hp in grid {
        hp.validate()?;
    }
    let trace = exec::map(grid, |hp| -> Result<TuningTrace> {
        let cv_f1 = cross_validate(data, folds, rng_seed, CvMetric::F1, |train| {
            train_forest(train, hp, rng_seed)
        })?;
        Ok(TuningTrace {
            hyperparams: *hp,
            cv_f1,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut best = &trace[0];
    for t in &trace[1..] {
        let a = (t.cv_f1.mean, best.cv_f1.mean);
        let better = a.0 > a.1
            || (a.0 == a.1
                && (t.hyperparams.n_estimators, depth_rank(t.hyperparams.max_depth))
                    < (best.hyperparams.n_estimators, depth_rank(best.hyperparams.max_depth)));
        if better {
            best = t;
        }
    }
    Ok((best.hyperparams, trace))
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::learn::Label;

    fn separable(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let label = Label::from_index(i % 2);
            let (cx, cy) = if label == Label::Suspicious { (1.0, 1.0) } else { (-1.0, -1.0) };
            rows.push(vec![cx + rng.random_range(-0.8..0.8), cy + rng.random_range(-0.8..0.8)]);
            labels.push(label);
        }
        Dataset::new(vec!["x".into(), "y".into()], rows, labels).unwrap()
    }

    #[test]
    fn separable_cv_accuracy() {
        let data = separable(500, 1);
        let hp = HyperParams { n_estimators: 20, ..Default::default() };
        let cv = cross_validate(&data, 5, 9, CvMetric::Accuracy, |d| train_forest(d, &hp, 9)).unwrap();
        assert_eq!(cv.fold_scores.len(), 5);
        assert!(cv.mean >= 0.95, "{}", cv.mean);
    }

    #[test]
    fn single_point_grid() {
        let data = separable(60, 2);
        let hp = HyperParams { n_estimators: 5, ..Default::default() };
        let (best, trace) = tune_hyperparams(&data, &[hp], 3, 0).unwrap();
        assert_eq!(best, hp);
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn full_forest_beats_stump() {
        let data = separable(200, 3);
        let stump = HyperParams { n_estimators: 5, max_depth: Some(0), ..Default::default() };
        let full = HyperParams { n_estimators: 20, ..Default::default() };
        let (best, trace) = tune_hyperparams(&data, &[stump, full], 5, 0).unwrap();
        assert_eq!(best, full);
        assert_eq!(trace.len(), 2);
        assert!(trace[0].cv_f1.mean < trace[1].cv_f1.mean);
    }

    #[test]
    fn ties_prefer_fewer_trees() {
        let data = separable(100, 4);
        // Depth-zero forests always score the same.
        let big = HyperParams { n_estimators: 9, max_depth: Some(0), bootstrap: false, ..Default::default() };
        let small = HyperParams { n_estimators: 3, ..big };
        let (best, _) = tune_hyperparams(&data, &[big, small], 4, 0).unwrap();
        assert_eq!(best, small);
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(tune_hyperparams(&separable(20, 0), &[], 2, 0).is_err());
    }

    #[test]
    fn default_grid_spans_six_parameters() {
        let grid = default_grid();
        assert_eq!(grid.len(), 64);
        assert!(grid.iter().all(|hp| hp.validate().is_ok()));
    }
}
