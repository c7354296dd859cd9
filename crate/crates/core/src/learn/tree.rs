//! CART classification tree with Gini impurity splits.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;

/// Rule for the number of candidate features drawn at each split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    Log2,
    All,
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let n = n_features as f64;
        let k = match self {
            MaxFeatures::Sqrt => n.sqrt().floor() as usize,
            MaxFeatures::Log2 => n.log2().floor() as usize,
            MaxFeatures::All => n_features,
        };
        k.clamp(1, n_features.max(1))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MaxFeatures::Sqrt => "sqrt",
            MaxFeatures::Log2 => "log2",
            MaxFeatures::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sqrt" => Some(MaxFeatures::Sqrt),
            "log2" => Some(MaxFeatures::Log2),
            "all" => Some(MaxFeatures::All),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct TreeParams {
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: usize,
    pub max_depth: Option<usize>,
}

/// Tree node. Split nodes send rows with `x[feature] <= threshold` left.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// `[P(benign), P(suspicious)]`.
    Leaf { probs: [f64; 2] },
}

/// Nodes are stored in preorder; `nodes[0]` is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

struct Builder<'a, R> {
    data: &'a Dataset,
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
    importances: Vec<f64>,
}

fn gini(counts: [f64; 2]) -> f64 {
    let n = counts[0] + counts[1];
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] / n;
    let p1 = counts[1] / n;
    1.0 - p0 * p0 - p1 * p1
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// Weighted child impurity, `n_left * gini_left + n_right * gini_right`.
    child_impurity: f64,
}

impl<R: Rng> Builder<'_, R> {
    fn counts(&self, samples: &[usize]) -> [f64; 2] {
        let mut c = [0.0, 0.0];
        for &i in samples {
            c[self.data.labels()[i].index()] += 1.0;
        }
        c
    }

    fn leaf(&mut self, counts: [f64; 2]) -> usize {
        let n = counts[0] + counts[1];
        self.nodes.push(Node::Leaf {
            probs: [counts[0] / n, counts[1] / n],
        });
        self.nodes.len() - 1
    }

    fn best_split_on(&self, feature: usize, samples: &mut [usize]) -> Option<Candidate> {
        let rows = self.data.rows();
        samples.sort_by(|&a, &b| rows[a][feature].total_cmp(&rows[b][feature]));
        let n = samples.len();
        let total = self.counts(samples);
        let mut left = [0.0, 0.0];
        let mut best: Option<Candidate> = None;
        let min_leaf = self.params.min_samples_leaf;
        for pos in 0..n - 1 {
            left[self.data.labels()[samples[pos]].index()] += 1.0;
            let lo = rows[samples[pos]][feature];
            let hi = rows[samples[pos + 1]][feature];
            if lo >= hi {
                continue;
            }
            let n_left = pos + 1;
            if n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let impurity = n_left as f64 * gini(left) + (n - n_left) as f64 * gini(right);
            if best.as_ref().is_none_or(|b| impurity < b.child_impurity) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Candidate {
                    feature,
                    threshold,
                    child_impurity: impurity,
                });
            }
        }
        best
    }

    fn is_constant(&self, feature: usize, samples: &[usize]) -> bool {
        let rows = self.data.rows();
        let first = rows[samples[0]][feature];
        samples.iter().all(|&i| rows[i][feature] == first)
    }

    fn build(&mut self, samples: &mut [usize], depth: usize) -> usize {
        let counts = self.counts(samples);
        let n = samples.len();
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if depth_reached
            || n < self.params.min_samples_split
            || n < 2 * self.params.min_samples_leaf
            || counts[0] == 0.0
            || counts[1] == 0.0
        {
            return self.leaf(counts);
        }

        let mut features: Vec<usize> = (0..self.data.n_features()).collect();
        features.shuffle(self.rng);
        let mut visited = 0;
        let mut best: Option<Candidate> = None;
        for f in features {
            if visited >= self.params.max_features && best.is_some() {
                break;
            }
            if self.is_constant(f, samples) {
                continue;
            }
            visited += 1;
            if let Some(c) = self.best_split_on(f, samples) {
                if best.as_ref().is_none_or(|b| c.child_impurity < b.child_impurity) {
                    best = Some(c);
                }
            }
        }
        let Some(split) = best else {
            return self.leaf(counts);
        };

        let parent_impurity = n as f64 * gini(counts);
        self.importances[split.feature] += parent_impurity - split.child_impurity;

        let rows = self.data.rows();
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&i| rows[i][split.feature] <= split.threshold);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { probs: [0.0, 0.0] });
        let l = self.build(&mut left, depth + 1);
        let r = self.build(&mut right, depth + 1);
        self.nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        at
    }
}

impl DecisionTree {
    /// Fits a tree on `samples` (row indices into `data`, repeats allowed).
    /// Returns the tree and its unnormalized per-feature impurity decrease.
    pub(crate) fn fit<R: Rng>(
        data: &Dataset,
        samples: &[usize],
        params: TreeParams,
        rng: &mut R,
    ) -> (DecisionTree, Vec<f64>) {
        assert!(!samples.is_empty(), "cannot fit a tree on zero samples");
        let mut builder = Builder {
            data,
            params,
            rng,
            nodes: Vec::new(),
            importances: vec![0.0; data.n_features()],
        };
        let mut samples = samples.to_vec();
        builder.build(&mut samples, 0);
        (
            DecisionTree {
                nodes: builder.nodes,
            },
            builder.importances,
        )
    }

    pub fn from_nodes(nodes: Vec<Node>) -> Option<DecisionTree> {
        let tree = DecisionTree { nodes };
        tree.is_well_formed().then_some(tree)
    }

    fn is_well_formed(&self) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        self.nodes.iter().enumerate().all(|(i, n)| match *n {
            Node::Split { left, right, threshold, .. } => {
                left > i && right > i && left < self.nodes.len() && right < self.nodes.len() && !threshold.is_nan()
            }
            Node::Leaf { probs } => {
                probs.iter().all(|p| (0.0..=1.0).contains(p)) && (probs[0] + probs[1] - 1.0).abs() < 1e-9
            }
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    pub fn predict_proba(&self, row: &[f64]) -> [f64; 2] {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
                Node::Leaf { probs } => return probs,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::learn::Label;

    fn params() -> TreeParams {
        TreeParams {
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: 1,
            max_depth: None,
        }
    }

    #[test]
    fn two_point_split_is_pure() {
        let data = Dataset::new(
            vec!["x".into()],
            vec![vec![1.0], vec![3.0]],
            vec![Label::Benign, Label::Suspicious],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (tree, imp) = DecisionTree::fit(&data, &[0, 1], params(), &mut rng);
        match tree.nodes()[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert!((1.0..3.0).contains(&threshold));
            }
            _ => panic!("expected a split"),
        }
        assert_eq!(tree.predict_proba(&[1.0]), [1.0, 0.0]);
        assert_eq!(tree.predict_proba(&[3.0]), [0.0, 1.0]);
        // Root gini 0.5 over two samples, children pure.
        assert!((imp[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conflicting_duplicates_give_frequency_leaf() {
        let data = Dataset::new(
            vec!["x".into()],
            vec![vec![1.0]; 4],
            vec![Label::Benign, Label::Suspicious, Label::Suspicious, Label::Suspicious],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (tree, _) = DecisionTree::fit(&data, &[0, 1, 2, 3], params(), &mut rng);
        assert_eq!(tree.nodes().len(), 1);
        assert_eq!(tree.predict_proba(&[1.0]), [0.25, 0.75]);
    }

    #[test]
    fn depth_zero_is_a_stump_leaf() {
        let data = Dataset::new(
            vec!["x".into()],
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![Label::Benign, Label::Suspicious, Label::Suspicious],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = TreeParams {
            max_depth: Some(0),
            ..params()
        };
        let (tree, _) = DecisionTree::fit(&data, &[0, 1, 2], p, &mut rng);
        assert_eq!(tree.depth(), 0);
    }

    #[test]
    fn min_samples_leaf_respected() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels: Vec<Label> = (0..10)
            .map(|i| if i == 0 { Label::Suspicious } else { Label::Benign })
            .collect();
        let data = Dataset::new(vec!["x".into()], rows, labels).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = TreeParams {
            min_samples_leaf: 3,
            ..params()
        };
        let idx: Vec<usize> = (0..10).collect();
        let (tree, _) = DecisionTree::fit(&data, &idx, p, &mut rng);
        // The lone suspicious row cannot be isolated.
        assert!(tree.predict_proba(&[0.0])[1] <= 1.0 / 3.0 + 1e-12);
    }

    #[test]
    fn max_features_rules() {
        assert_eq!(MaxFeatures::Sqrt.resolve(12), 3);
        assert_eq!(MaxFeatures::Log2.resolve(12), 3);
        assert_eq!(MaxFeatures::All.resolve(12), 12);
        assert_eq!(MaxFeatures::Log2.resolve(1), 1);
    }
}
