//! Bagged ensemble of Gini trees.
//!
//! Every tree draws from its own ChaCha stream (`rng_seed`, stream = tree
//! index), so a trained forest is identical whether trees are fitted in
//! parallel or one after another.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Label};
use super::tree::{DecisionTree, MaxFeatures, Node, TreeParams};
use crate::error::{Error, Result};
use crate::exec;

const FORMAT_TAG: &str = "squadkit-forest";
const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HyperParams {
    pub n_estimators: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            bootstrap: true,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::Config("n_estimators must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be at least 2".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be at least 1".into()));
        }
        Ok(())
    }

    fn encode(&self) -> String {
        format!(
            "n_estimators={} min_samples_split={} min_samples_leaf={} max_features={} max_depth={} bootstrap={}",
            self.n_estimators,
            self.min_samples_split,
            self.min_samples_leaf,
            self.max_features.as_str(),
            self.max_depth.map_or("none".to_string(), |d| d.to_string()),
            self.bootstrap
        )
    }

    fn decode(fields: &[&str]) -> Result<Self> {
        let mut hp = HyperParams::default();
        for field in fields {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::data(format!("bad hyperparameter `{field}`")))?;
            let bad = || Error::data(format!("bad value for {k}: `{v}`"));
            match k {
                "n_estimators" => hp.n_estimators = v.parse().map_err(|_| bad())?,
                "min_samples_split" => hp.min_samples_split = v.parse().map_err(|_| bad())?,
                "min_samples_leaf" => hp.min_samples_leaf = v.parse().map_err(|_| bad())?,
                "max_features" => hp.max_features = MaxFeatures::parse(v).ok_or_else(bad)?,
                "max_depth" => {
                    hp.max_depth = if v == "none" {
                        None
                    } else {
                        Some(v.parse().map_err(|_| bad())?)
                    }
                }
                "bootstrap" => hp.bootstrap = v.parse().map_err(|_| bad())?,
                _ => return Err(Error::data(format!("unknown hyperparameter `{k}`"))),
            }
        }
        hp.validate().map_err(|e| Error::data(e.to_string()))?;
        Ok(hp)
    }
}

/// Predicted label with the ensemble's suspicious probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub probability: f64,
}

/// Suspicious iff the probability is at least 0.5.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct ForestModel {
    trees: Vec<DecisionTree>,
    hyperparams: HyperParams,
    rng_seed: u64,
    feature_order: Vec<String>,
    /// Mean decrease in impurity per feature, summing to 1 (or all zero
    /// when no tree split).
    importances: Vec<f64>,
}

pub fn train_forest(data: &Dataset, hp: &HyperParams, rng_seed: u64) -> Result<ForestModel> {
    hp.validate()?;
    if !data.has_both_classes() {
        return Err(Error::invalid("training data must contain both classes"));
    }
    let n = data.len();
    let params = TreeParams {
        min_samples_split: hp.min_samples_split,
        min_samples_leaf: hp.min_samples_leaf,
        max_features: hp.max_features.resolve(data.n_features()),
        max_depth: hp.max_depth,
    };
    let fitted = exec::map_range(hp.n_estimators, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(t as u64);
        let samples: Vec<usize> = if hp.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        DecisionTree::fit(data, &samples, params, &mut rng)
    });

    let mut importances = vec![0.0; data.n_features()];
    let mut trees = Vec::with_capacity(fitted.len());
    for (tree, imp) in fitted {
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            for (acc, v) in importances.iter_mut().zip(&imp) {
                *acc += v / total;
            }
        }
        trees.push(tree);
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        importances.iter_mut().for_each(|v| *v /= total);
    }
    Ok(ForestModel {
        trees,
        hyperparams: *hp,
        rng_seed,
        feature_order: data.feature_names().to_vec(),
        importances,
    })
}

impl ForestModel {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn hyperparams(&self) -> &HyperParams {
        &self.hyperparams
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn feature_order(&self) -> &[String] {
        &self.feature_order
    }

    pub fn importances(&self) -> &[f64] {
        &self.importances
    }

    /// Mean over trees of the leaf probability of `Suspicious`.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_order.len() {
            return Err(Error::invalid(format!(
                "model expects {} features, got {}",
                self.feature_order.len(),
                row.len()
            )));
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict_proba(row)[1]).sum();
        Ok(sum / self.trees.len() as f64)
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<Prediction> {
        let probability = self.predict_proba(row)?;
        let label = if probability >= DECISION_THRESHOLD {
            Label::Suspicious
        } else {
            Label::Benign
        };
        Ok(Prediction { label, probability })
    }

    pub fn predict_proba_batch(&self, data: &Dataset) -> Result<Vec<f64>> {
        exec::map(data.rows(), |r| self.predict_proba(r)).into_iter().collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FORMAT_TAG} {FORMAT_VERSION}");
        let _ = writeln!(s, "features {} {}", self.feature_order.len(), self.feature_order.join(" "));
        let _ = writeln!(s, "hyperparams {}", self.hyperparams.encode());
        let _ = writeln!(s, "seed {}", self.rng_seed);
        let imp: Vec<String> = self.importances.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "importances {}", imp.join(" "));
        let _ = writeln!(s, "trees {}", self.trees.len());
        for tree in &self.trees {
            let _ = writeln!(s, "tree {}", tree.nodes().len());
            for node in tree.nodes() {
                match node {
                    Node::Split { feature, threshold, .. } => {
                        let _ = writeln!(s, "S {feature} {threshold:?}");
                    }
                    Node::Leaf { probs } => {
                        let _ = writeln!(s, "L {:?} {:?}", probs[0], probs[1]);
                    }
                }
            }
        }
        s
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<ForestModel> {
        let mut lines = input.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::data(format!("model file ended before {what}")))?
                .map_err(Error::from)
        };
        let header = next("header")?;
        if header != format!("{FORMAT_TAG} {FORMAT_VERSION}") {
            return Err(Error::data(format!("unsupported model header `{header}`")));
        }
        let features_line = next("features")?;
        let mut f = features_line.split(' ');
        expect_word(f.next(), "features")?;
        let n_features: usize = parse_num(f.next(), "feature count")?;
        let feature_order: Vec<String> = f.map(str::to_string).collect();
        if feature_order.len() != n_features {
            return Err(Error::data("feature count does not match feature names"));
        }

        let hp_line = next("hyperparams")?;
        let hp_fields: Vec<&str> = hp_line.split(' ').collect();
        expect_word(hp_fields.first().copied(), "hyperparams")?;
        let hyperparams = HyperParams::decode(&hp_fields[1..])?;

        let seed_line = next("seed")?;
        let mut s = seed_line.split(' ');
        expect_word(s.next(), "seed")?;
        let rng_seed: u64 = parse_num(s.next(), "seed")?;

        let imp_line = next("importances")?;
        let mut imp = imp_line.split(' ');
        expect_word(imp.next(), "importances")?;
        let importances = imp
            .filter(|t| !t.is_empty())
            .map(|t| parse_num::<f64>(Some(t), "importance"))
            .collect::<Result<Vec<_>>>()?;
        if importances.len() != n_features {
            return Err(Error::data("importance count does not match feature count"));
        }

        let trees_line = next("trees")?;
        let mut t = trees_line.split(' ');
        expect_word(t.next(), "trees")?;
        let n_trees: usize = parse_num(t.next(), "tree count")?;
        if n_trees == 0 {
            return Err(Error::data("model has no trees"));
        }

        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            let tree_line = next("tree")?;
            let mut t = tree_line.split(' ');
            expect_word(t.next(), "tree")?;
            let n_nodes: usize = parse_num(t.next(), "node count")?;
            let mut raw = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                raw.push(next("node")?);
            }
            trees.push(parse_preorder(&raw, n_features)?);
        }
        Ok(ForestModel {
            trees,
            hyperparams,
            rng_seed,
            feature_order,
            importances,
        })
    }
}

fn expect_word(got: Option<&str>, want: &str) -> Result<()> {
    if got == Some(want) {
        Ok(())
    } else {
        Err(Error::data(format!("expected `{want}` line in model file")))
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::data(format!("bad {what} in model file")))
}

/// Rebuilds child links from a preorder listing.
fn parse_preorder(lines: &[String], n_features: usize) -> Result<DecisionTree> {
    enum Raw {
        Split(usize, f64),
        Leaf([f64; 2]),
    }
    let raw = lines
        .iter()
        .map(|l| {
            let toks: Vec<&str> = l.split(' ').collect();
            match toks.as_slice() {
                ["S", f, t] => {
                    let f: usize = parse_num(Some(f), "split feature")?;
                    if f >= n_features {
                        return Err(Error::data(format!("split feature {f} out of range")));
                    }
                    Ok(Raw::Split(f, parse_num(Some(t), "threshold")?))
                }
                ["L", a, b] => Ok(Raw::Leaf([parse_num(Some(a), "leaf")?, parse_num(Some(b), "leaf")?])),
                _ => Err(Error::data(format!("bad node line `{l}`"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    fn link(raw: &[Raw], at: usize, nodes: &mut Vec<Node>) -> Result<usize> {
        let node = raw
            .get(at)
            .ok_or_else(|| Error::data("truncated tree listing"))?;
        match *node {
            Raw::Leaf(probs) => {
                nodes.push(Node::Leaf { probs });
                Ok(at + 1)
            }
            Raw::Split(feature, threshold) => {
                nodes.push(Node::Leaf { probs: [0.0, 0.0] });
                let left = at + 1;
                let right = link(raw, left, nodes)?;
                let end = link(raw, right, nodes)?;
                nodes[at] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                Ok(end)
            }
        }
    }

    let mut nodes = Vec::with_capacity(raw.len());
    let end = link(&raw, 0, &mut nodes)?;
    if end != raw.len() {
        return Err(Error::data("tree listing has trailing nodes"));
    }
    DecisionTree::from_nodes(nodes).ok_or_else(|| Error::data("malformed tree"))
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    fn blobs(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let label = if i % 2 == 0 { Label::Benign } else { Label::Suspicious };
            let c = if label == Label::Suspicious { 2.0 } else { -2.0 };
            rows.push(vec![c + rng.random_range(-1.5..1.5), rng.random_range(-3.0..3.0)]);
            labels.push(label);
        }
        Dataset::new(vec!["signal".into(), "noise".into()], rows, labels).unwrap()
    }

    #[test]
    fn single_full_tree_memorizes() {
        let data = blobs(200, 3);
        let hp = HyperParams {
            n_estimators: 1,
            bootstrap: false,
            max_features: MaxFeatures::All,
            ..Default::default()
        };
        let model = train_forest(&data, &hp, 11).unwrap();
        for (row, &label) in data.rows().iter().zip(data.labels()) {
            assert_eq!(model.predict_row(row).unwrap().label, label);
        }
    }

    #[test]
    fn deterministic_and_round_trips() {
        let data = blobs(120, 5);
        let hp = HyperParams {
            n_estimators: 15,
            ..Default::default()
        };
        let a = train_forest(&data, &hp, 99).unwrap();
        let b = train_forest(&data, &hp, 99).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let c = train_forest(&data, &hp, 100).unwrap();
        assert_ne!(a.to_text(), c.to_text());

        let back = ForestModel::read_from(a.to_text().as_bytes()).unwrap();
        assert_eq!(back, a);
        for row in data.rows() {
            assert_eq!(back.predict_proba(row).unwrap(), a.predict_proba(row).unwrap());
        }
    }

    #[test]
    fn prediction_is_tree_mean() {
        let data = blobs(80, 8);
        let model = train_forest(&data, &HyperParams { n_estimators: 7, ..Default::default() }, 1).unwrap();
        let row = [0.3, -0.2];
        let mean = model.trees().iter().map(|t| t.predict_proba(&row)[1]).sum::<f64>() / 7.0;
        assert_eq!(model.predict_proba(&row).unwrap(), mean);
    }

    #[test]
    fn all_suspicious_leaves() {
        let leaf = DecisionTree::from_nodes(vec![Node::Leaf { probs: [0.0, 1.0] }]).unwrap();
        let model = ForestModel {
            trees: vec![leaf.clone(), leaf.clone(), leaf],
            hyperparams: HyperParams::default(),
            rng_seed: 0,
            feature_order: vec!["a".into()],
            importances: vec![0.0],
        };
        let p = model.predict_row(&[0.0]).unwrap();
        assert_eq!(p, Prediction { label: Label::Suspicious, probability: 1.0 });
    }

    #[test]
    fn half_probability_is_suspicious() {
        let half = DecisionTree::from_nodes(vec![Node::Leaf { probs: [0.5, 0.5] }]).unwrap();
        let model = ForestModel {
            trees: vec![half],
            hyperparams: HyperParams::default(),
            rng_seed: 0,
            feature_order: vec!["a".into()],
            importances: vec![0.0],
        };
        assert_eq!(model.predict_row(&[1.0]).unwrap().label, Label::Suspicious);
    }

    #[test]
    fn feature_count_mismatch() {
        let data = blobs(40, 1);
        let model = train_forest(&data, &HyperParams { n_estimators: 2, ..Default::default() }, 0).unwrap();
        assert!(matches!(model.predict_row(&[1.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rejects_single_class_and_bad_params() {
        let data = Dataset::new(vec!["a".into()], vec![vec![0.0], vec![1.0]], vec![Label::Benign; 2]).unwrap();
        assert!(train_forest(&data, &HyperParams::default(), 0).is_err());
        let bad = HyperParams { min_samples_split: 1, ..Default::default() };
        assert!(train_forest(&blobs(10, 0), &bad, 0).is_err());
    }

    #[test]
    fn importance_prefers_signal() {
        let data = blobs(400, 4);
        let model = train_forest(&data, &HyperParams { n_estimators: 30, max_depth: Some(4), ..Default::default() }, 2).unwrap();
        let imp = model.importances();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp[0] > imp[1]);
    }

    #[test]
    fn rejects_corrupt_model_files() {
        let data = blobs(40, 1);
        let text = train_forest(&data, &HyperParams { n_estimators: 2, ..Default::default() }, 0)
            .unwrap()
            .to_text();
        assert!(ForestModel::read_from("garbage\n".as_bytes()).is_err());
        let truncated: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(ForestModel::read_from(truncated.as_bytes()).is_err());
        let bad_feature = text.replacen("S 0 ", "S 9 ", 1).replacen("S 1 ", "S 9 ", 1);
        assert!(ForestModel::read_from(bad_feature.as_bytes()).is_err());
    }
}
