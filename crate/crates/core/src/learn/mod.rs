//! Classifier training and evaluation: SMOTE balancing, a bagged Gini
//! forest, grid search over its hyperparameters and the usual binary
//! metrics.

mod dataset;
mod forest;
mod metrics;
mod smote;
mod tree;
mod tuning;

pub use dataset::{complement, stratified_folds, stratified_holdout, Dataset, Label};
pub use forest::{train_forest, ForestModel, HyperParams, Prediction, DECISION_THRESHOLD};
pub use metrics::{auc_trapezoid, evaluate, evaluate_scores, roc_curve, Confusion, EvalReport};
pub use smote::{smote, SmoteOutput, SyntheticOrigin};
pub use tree::{DecisionTree, MaxFeatures, Node};
pub use tuning::{cross_validate, default_grid, small_grid, tune_hyperparams, CvMetric, CvScore, TuningTrace};
