//! Gradient-boosted regression trees on the logistic loss.
//!
//! Second-order boosting: each round fits a depth-limited tree to the
//! gradient/hessian of the log-loss with exact greedy split search over
//! the distinct values of every feature. Leaf weights are `-G / (H + lambda)`.
//! Categorical codes are split as ordinary ordered numbers.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_both_classes, log_loss, sigmoid, ModelKind, ModelMetadata, Predictor};
use crate::data::Dataset;
use crate::digest::ContentHasher;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Minimum rows on each side of a split.
    pub min_leaf: usize,
    /// L2 penalty on leaf weights.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Row fraction drawn (without replacement) per round; 1.0 uses all rows.
    #[serde(default = "default_subsample")]
    pub subsample: f64,
    pub seed: u64,
}

fn default_lambda() -> f64 {
    1.0
}

fn default_subsample() -> f64 {
    1.0
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_leaf: 5,
            lambda: 1.0,
            subsample: 1.0,
            seed: 0,
        }
    }
}

impl GbdtConfig {
    fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::InvalidArgument("max_depth must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(
                "learning_rate must be positive".into(),
            ));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidArgument("min_leaf must be >= 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument("lambda must be >= 0".into()));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::InvalidArgument(
                "subsample must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let mut h = ContentHasher::new();
        h.str("gbdt")
            .usize(self.rounds)
            .usize(self.max_depth)
            .f64(self.learning_rate)
            .usize(self.min_leaf)
            .f64(self.lambda)
            .f64(self.subsample)
            .u64(self.seed);
        h.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    /// Rows with `value <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Binary tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: alloc::vec![Node::Leaf { value }],
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &RegressionTree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// Split features used anywhere in the tree.
    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }

    fn check(&self, n_features: usize) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::Consistency("empty tree".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { value } if !value.is_finite() => {
                    return Err(Error::Consistency(format!("node {}: non-finite leaf", i)))
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return Err(Error::IndexOutOfRange {
                            index: feature,
                            len: n_features,
                        });
                    }
                    // children must come after their parent, which rules out cycles
                    if left <= i || right <= i || left >= n || right >= n || !threshold.is_finite()
                    {
                        return Err(Error::Consistency(format!("node {}: bad split", i)));
                    }
                }
                Node::Leaf { .. } => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub n_features: usize,
    pub base_score: f64,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub trees: Vec<RegressionTree>,
    #[serde(default)]
    pub config_digest: String,
}

impl GbdtModel {
    /// Assembles a model from explicit trees, checking split indices and depth.
    pub fn from_parts(
        n_features: usize,
        base_score: f64,
        learning_rate: f64,
        max_depth: usize,
        trees: Vec<RegressionTree>,
    ) -> Result<Self> {
        let model = Self {
            n_features,
            base_score,
            learning_rate,
            max_depth,
            trees,
            config_digest: String::new(),
        };
        model.check()?;
        Ok(model)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.base_score.is_finite() && self.learning_rate.is_finite()) {
            return Err(Error::Consistency("non-finite model parameters".into()));
        }
        for tree in &self.trees {
            tree.check(self.n_features)?;
            if tree.depth() > self.max_depth {
                return Err(Error::Consistency(format!(
                    "tree depth {} exceeds max_depth {}",
                    tree.depth(),
                    self.max_depth
                )));
            }
        }
        Ok(())
    }
}

impl Predictor for GbdtModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score(&self, values: &[f64]) -> f64 {
        let mut s = self.base_score;
        for t in &self.trees {
            s += self.learning_rate * t.eval(values);
        }
        s
    }

    fn metadata(&self) -> ModelMetadata {
        ModelMetadata {
            kind: ModelKind::Gbdt,
            n_features: self.n_features,
            config_digest: self.config_digest.clone(),
        }
    }
}

/// Training diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtReport {
    pub train_accuracy: f64,
    /// Training log-loss before the first round and after each round.
    pub log_loss: Vec<f64>,
}

struct Grower<'a> {
    data: &'a Dataset,
    grad: &'a [f64],
    hess: &'a [f64],
    cfg: &'a GbdtConfig,
    nodes: Vec<Node>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Grower<'_> {
    fn leaf_value(&self, rows: &[usize]) -> f64 {
        let (g, h) = rows.iter().fold((0.0, 0.0), |(g, h), &i| {
            (g + self.grad[i], h + self.hess[i])
        });
        let denom = h + self.cfg.lambda;
        if denom > 0.0 {
            -g / denom
        } else {
            0.0
        }
    }

    fn find_split(&self, rows: &[usize]) -> Option<BestSplit> {
        let lambda = self.cfg.lambda;
        let min_leaf = self.cfg.min_leaf;
        let (g_tot, h_tot) = rows.iter().fold((0.0, 0.0), |(g, h), &i| {
            (g + self.grad[i], h + self.hess[i])
        });
        let parent = g_tot * g_tot / (h_tot + lambda);
        let mut best: Option<BestSplit> = None;
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for f in 0..self.data.n_features() {
            order.clear();
            order.extend(rows.iter().map(|&i| (self.data.row(i)[f], i)));
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..order.len() - 1 {
                let i = order[k].1;
                gl += self.grad[i];
                hl += self.hess[i];
                let (lo, hi) = (order[k].0, order[k + 1].0);
                if lo == hi || k + 1 < min_leaf || order.len() - (k + 1) < min_leaf {
                    continue;
                }
                let (gr, hr) = (g_tot - gl, h_tot - hl);
                let gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent;
                if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        gain,
                        feature: f,
                        threshold,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let split = if depth < self.cfg.max_depth && rows.len() >= 2 * self.cfg.min_leaf {
            self.find_split(&rows)
        } else {
            None
        };
        match split {
            None => {
                self.nodes[id] = Node::Leaf {
                    value: self.leaf_value(&rows),
                };
            }
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows
                    .into_iter()
                    .partition(|&i| self.data.row(i)[s.feature] <= s.threshold);
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                };
            }
        }
        id
    }
}

pub fn train_gbdt(train: &Dataset, config: &GbdtConfig) -> Result<(GbdtModel, GbdtReport)> {
    config.validate()?;
    check_both_classes(train)?;
    let n = train.n_rows();
    let p = train.fraction_positive();
    let base_score = libm::log(p / (1.0 - p));
    let labels = train.labels();

    let mut scores = alloc::vec![base_score; n];
    let mut losses = alloc::vec![log_loss(&scores, labels)];
    let mut grad = alloc::vec![0.0; n];
    let mut hess = alloc::vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_sample = ((n as f64 * config.subsample) as usize).max(1);
    let mut trees = Vec::with_capacity(config.rounds);

    for _ in 0..config.rounds {
        for i in 0..n {
            let prob = sigmoid(scores[i]);
            grad[i] = prob - labels[i] as f64;
            hess[i] = prob * (1.0 - prob);
        }
        let rows: Vec<usize> = if n_sample < n {
            let mut idx = rand::seq::index::sample(&mut rng, n, n_sample).into_vec();
            idx.sort_unstable();
            idx
        } else {
            (0..n).collect()
        };
        let mut grower = Grower {
            data: train,
            grad: &grad,
            hess: &hess,
            cfg: config,
            nodes: Vec::new(),
        };
        grower.grow(rows, 0);
        let tree = RegressionTree {
            nodes: grower.nodes,
        };
        for (i, s) in scores.iter_mut().enumerate() {
            *s += config.learning_rate * tree.eval(train.row(i));
        }
        let loss = log_loss(&scores, labels);
        if !loss.is_finite() {
            return Err(Error::Training("training loss became non-finite".into()));
        }
        losses.push(loss);
        trees.push(tree);
    }

    let model = GbdtModel {
        n_features: train.n_features(),
        base_score,
        learning_rate: config.learning_rate,
        max_depth: config.max_depth,
        trees,
        config_digest: config.digest(),
    };
    let report = GbdtReport {
        train_accuracy: super::accuracy(&model, train),
        log_loss: losses,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSchema;
    use rand::Rng;

    fn separable(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            rows.push(alloc::vec![a, b]);
            labels.push(u8::from(a + 0.5 * b > 0.0));
        }
        let schema = alloc::vec![FeatureSchema::numerical("a"), FeatureSchema::numerical("b")];
        Dataset::new(schema, rows, labels).unwrap()
    }

    fn cfg(rounds: usize, depth: usize) -> GbdtConfig {
        GbdtConfig {
            rounds,
            max_depth: depth,
            learning_rate: 0.3,
            min_leaf: 2,
            ..GbdtConfig::default()
        }
    }

    #[test]
    fn fits_separable_toy_set() {
        let d = separable(200, 1);
        let (m, report) = train_gbdt(&d, &cfg(50, 2)).unwrap();
        assert!(report.train_accuracy >= 0.95, "{}", report.train_accuracy);
        assert!(m.trees.iter().all(|t| t.depth() <= 2));
        assert!(report.log_loss.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn zero_rounds_is_constant() {
        let d = separable(100, 2);
        let (m, _) = train_gbdt(&d, &cfg(0, 2)).unwrap();
        let p = d.fraction_positive();
        let expected = libm::log(p / (1.0 - p));
        assert_eq!(m.score(&[0.3, -0.9]), expected);
        assert_eq!(m.score(&[-5.0, 5.0]), expected);
    }

    #[test]
    fn deterministic_training() {
        let d = separable(150, 3);
        let c = GbdtConfig {
            subsample: 0.7,
            ..cfg(20, 3)
        };
        let (a, _) = train_gbdt(&d, &c).unwrap();
        let (b, _) = train_gbdt(&d, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_is_an_error() {
        let schema = alloc::vec![FeatureSchema::numerical("a"), FeatureSchema::numerical("b")];
        let d = Dataset::new(
            schema,
            alloc::vec![alloc::vec![1.0, 2.0], alloc::vec![2.0, 3.0]],
            alloc::vec![1, 1],
        )
        .unwrap();
        assert!(matches!(
            train_gbdt(&d, &cfg(5, 2)),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn from_parts_rejects_bad_feature_index() {
        let t = RegressionTree {
            nodes: alloc::vec![
                Node::Split {
                    feature: 3,
                    threshold: 0.0,
                    left: 1,
                    right: 2
                },
                Node::Leaf { value: 1.0 },
                Node::Leaf { value: -1.0 },
            ],
        };
        assert!(GbdtModel::from_parts(2, 0.0, 1.0, 3, alloc::vec![t]).is_err());
    }

    #[test]
    fn score_is_pure() {
        let d = separable(120, 4);
        let (m, _) = train_gbdt(&d, &cfg(30, 3)).unwrap();
        let x = [0.123, -0.456];
        let first = m.score(&x).to_bits();
        assert!((0..1000).all(|_| m.score(&x).to_bits() == first));
    }
}
