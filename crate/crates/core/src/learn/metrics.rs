use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Label};
use super::forest::{ForestModel, DECISION_THRESHOLD};
use crate::error::{Error, Result};

/// Confusion counts with `Suspicious` as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Confusion {
    pub fn new(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (Label::Suspicious, Label::Suspicious) => c.tp += 1,
                (Label::Benign, Label::Suspicious) => c.fp += 1,
                (Label::Benign, Label::Benign) => c.tn += 1,
                (Label::Suspicious, Label::Benign) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// 0 when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: Confusion,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub roc_points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC points obtained by lowering the threshold through every distinct
/// score. With only one class present the curve is the diagonal.
pub fn roc_curve(scores: &[f64], labels: &[Label]) -> Vec<(f64, f64)> {
    let pos = labels.iter().filter(|&&l| l == Label::Suspicious).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return vec![(0.0, 0.0), (1.0, 1.0)];
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        while i < order.len() && scores[order[i]] == score {
            match labels[order[i]] {
                Label::Suspicious => tp += 1,
                Label::Benign => fp += 1,
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    points
}

/// Trapezoidal area under a curve given in increasing x order.
pub fn auc_trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

pub fn evaluate_scores(scores: &[f64], labels: &[Label]) -> Result<EvalReport> {
    if scores.is_empty() || scores.len() != labels.len() {
        return Err(Error::invalid("evaluation needs one score per label and at least one row"));
    }
    let predicted: Vec<Label> = scores
        .iter()
        .map(|&p| {
            if p >= DECISION_THRESHOLD {
                Label::Suspicious
            } else {
                Label::Benign
            }
        })
        .collect();
    let confusion = Confusion::from_predictions(labels, &predicted);
    let roc_points = roc_curve(scores, labels);
    let auc = auc_trapezoid(&roc_points);
    Ok(EvalReport {
        confusion,
        precision: confusion.precision(),
        recall: confusion.recall(),
        f1: confusion.f1(),
        accuracy: confusion.accuracy(),
        roc_points,
        auc,
    })
}

pub fn evaluate(model: &ForestModel, test: &Dataset) -> Result<EvalReport> {
    let scores = model.predict_proba_batch(test)?;
    evaluate_scores(&scores, test.labels())
}
