//! The six classifiers behind one train / predict / evaluate interface.
//!
//! Labels are handled as class indices in the fixed order
//! Contradiction < Entailment < Neutral; every argmax in this module breaks
//! ties toward the lower index.

pub mod boost;
pub mod forest;
pub mod gradcheck;
pub mod knn;
pub mod linear;
pub mod metrics;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::sparse::SparseVec;

pub use boost::AdaBoost;
pub use forest::RandomForest;
pub use gradcheck::finite_difference_check;
pub use knn::Knn;
pub use linear::{LinearLoss, LinearModel};
pub use metrics::{ClassMetrics, Metrics};
pub use tree::{DecisionTree, MaxFeatures};

use linear::LinearParams;
use tree::GrowParams;

/// Index of the largest score; the first one wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    SvmLinear,
    Sgd,
    Dt,
    Adaboost,
    Knn,
    Rf,
}

impl Algorithm {
    /// In report column order.
    pub const ALL: [Algorithm; 6] = [
        Algorithm::SvmLinear,
        Algorithm::Sgd,
        Algorithm::Dt,
        Algorithm::Adaboost,
        Algorithm::Knn,
        Algorithm::Rf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::SvmLinear => "svm_linear",
            Algorithm::Sgd => "sgd",
            Algorithm::Dt => "dt",
            Algorithm::Adaboost => "adaboost",
            Algorithm::Knn => "knn",
            Algorithm::Rf => "rf",
        }
    }

    /// Column header used in Markdown reports.
    pub fn short_name(self) -> &'static str {
        match self {
            Algorithm::SvmLinear => "SVM",
            Algorithm::Sgd => "SGD",
            Algorithm::Dt => "DT",
            Algorithm::Adaboost => "ADA",
            Algorithm::Knn => "KNN",
            Algorithm::Rf => "RF",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Algorithm::Dt => 1,
            Algorithm::Rf => 2,
            Algorithm::Knn => 3,
            Algorithm::Adaboost => 4,
            Algorithm::SvmLinear => 5,
            Algorithm::Sgd => 6,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "dt" | "tree" => Algorithm::Dt,
            "rf" | "forest" => Algorithm::Rf,
            "knn" => Algorithm::Knn,
            "adaboost" | "ada" => Algorithm::Adaboost,
            "svm_linear" | "svm" => Algorithm::SvmLinear,
            "sgd" => Algorithm::Sgd,
            other => {
                return Err(Error::Config(format!(
                    "unknown classifier `{other}` (expected one of dt, rf, knn, adaboost, svm_linear, sgd)"
                )))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            bootstrap: true,
            max_features: MaxFeatures::Sqrt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostConfig {
    pub rounds: usize,
    pub learning_rate: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            rounds: 50,
            learning_rate: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 1.0, epochs: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdConfig {
    /// Initial step; step `t` uses `lr / (1 + t / n)`.
    pub lr: f64,
    pub epochs: usize,
    pub alpha: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            epochs: 20,
            alpha: 1e-4,
        }
    }
}

/// Hyperparameters for every algorithm; only the trained one is read.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub dt: TreeConfig,
    pub rf: ForestConfig,
    pub knn: KnnConfig,
    pub adaboost: BoostConfig,
    pub svm_linear: SvmConfig,
    pub sgd: SgdConfig,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be a positive number, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be at least {min}, got {v}")))
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (p, d, split, leaf) in [
            ("dt", self.dt.max_depth, self.dt.min_samples_split, self.dt.min_samples_leaf),
            ("rf", self.rf.max_depth, self.rf.min_samples_split, self.rf.min_samples_leaf),
        ] {
            if d == Some(0) {
                return Err(Error::Config(format!("{p}.max_depth must be at least 1")));
            }
            at_least(&format!("{p}.min_samples_split"), split, 2)?;
            at_least(&format!("{p}.min_samples_leaf"), leaf, 1)?;
        }
        at_least("rf.trees", self.rf.trees, 1)?;
        if self.rf.max_features == MaxFeatures::Count(0) {
            return Err(Error::Config("rf.max_features count must be at least 1".into()));
        }
        at_least("knn.k", self.knn.k, 1)?;
        at_least("adaboost.rounds", self.adaboost.rounds, 1)?;
        positive("adaboost.learning_rate", self.adaboost.learning_rate)?;
        positive("svm_linear.c", self.svm_linear.c)?;
        at_least("svm_linear.epochs", self.svm_linear.epochs, 1)?;
        positive("sgd.lr", self.sgd.lr)?;
        at_least("sgd.epochs", self.sgd.epochs, 1)?;
        if !(self.sgd.alpha.is_finite() && self.sgd.alpha >= 0.0) {
            return Err(Error::Config(format!("sgd.alpha must be >= 0, got {}", self.sgd.alpha)));
        }
        Ok(())
    }
}

pub const DEFAULT_SEED: u64 = 42;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub hyperparams: Hyperparams,
}

impl TrainConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            seed: DEFAULT_SEED,
            hyperparams: Hyperparams::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.hyperparams.validate()
    }
}

/// A trained classifier. Immutable; prediction is a pure function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Classifier {
    Tree(DecisionTree),
    Forest(RandomForest),
    Knn(Knn),
    Boost(AdaBoost),
    Linear(LinearModel),
}

/// Checks shapes and returns the common row dimension.
fn check_rows(x: &[SparseVec]) -> Result<usize> {
    let dim = x.first().map(|r| r.dim).ok_or_else(|| Error::InvalidInput("empty training set".into()))?;
    for r in x {
        if r.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: r.dim });
        }
    }
    Ok(dim)
}

/// Trains `cfg.algorithm` on rows `x` with labels `y`.
pub fn train(x: &[SparseVec], y: &[Label], cfg: &TrainConfig, exec: Exec) -> Result<Classifier> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    check_rows(x)?;
    let yi: Vec<usize> = y.iter().map(|l| l.index()).collect();
    let h = &cfg.hyperparams;
    Ok(match cfg.algorithm {
        Algorithm::Dt => {
            let p = GrowParams {
                max_depth: h.dt.max_depth,
                min_samples_split: h.dt.min_samples_split,
                min_samples_leaf: h.dt.min_samples_leaf,
                max_features: MaxFeatures::All,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Classifier::Tree(DecisionTree::fit(x, &yi, None, p, &mut rng))
        }
        Algorithm::Rf => {
            let p = GrowParams {
                max_depth: h.rf.max_depth,
                min_samples_split: h.rf.min_samples_split,
                min_samples_leaf: h.rf.min_samples_leaf,
                max_features: h.rf.max_features,
            };
            Classifier::Forest(RandomForest::fit(x, &yi, h.rf.trees, h.rf.bootstrap, p, cfg.seed, exec))
        }
        Algorithm::Knn => Classifier::Knn(Knn::fit(x, &yi, h.knn.k)),
        Algorithm::Adaboost => Classifier::Boost(AdaBoost::fit(
            x,
            &yi,
            h.adaboost.rounds,
            h.adaboost.learning_rate,
        )?),
        Algorithm::SvmLinear => {
            let p = LinearParams {
                loss: LinearLoss::Hinge,
                epochs: h.svm_linear.epochs,
                c_or_lr: h.svm_linear.c,
                alpha: 0.0,
            };
            Classifier::Linear(LinearModel::fit(x, &yi, &p, cfg.seed, exec))
        }
        Algorithm::Sgd => {
            let p = LinearParams {
                loss: LinearLoss::Logistic,
                epochs: h.sgd.epochs,
                c_or_lr: h.sgd.lr,
                alpha: h.sgd.alpha,
            };
            Classifier::Linear(LinearModel::fit(x, &yi, &p, cfg.seed, exec))
        }
    })
}

impl Classifier {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Classifier::Tree(_) => Algorithm::Dt,
            Classifier::Forest(_) => Algorithm::Rf,
            Classifier::Knn(_) => Algorithm::Knn,
            Classifier::Boost(_) => Algorithm::Adaboost,
            Classifier::Linear(m) => match m.loss() {
                LinearLoss::Hinge => Algorithm::SvmLinear,
                LinearLoss::Logistic => Algorithm::Sgd,
            },
        }
    }

    /// Per-class scores in label order: leaf distribution (DT), vote share
    /// (RF, KNN), normalized alpha votes (AdaBoost) or decision values
    /// (linear models, `-inf` for classes absent from training).
    pub fn scores(&self, x: &SparseVec) -> [f64; Label::COUNT] {
        match self {
            Classifier::Tree(t) => t.scores(x),
            Classifier::Forest(f) => f.scores(x),
            Classifier::Knn(k) => k.scores(x),
            Classifier::Boost(b) => b.scores(x),
            Classifier::Linear(l) => l.scores(x),
        }
    }

    pub fn predict_one(&self, x: &SparseVec) -> Label {
        Label::from_index(argmax(&self.scores(x)))
    }

    /// Predicts every row; fails if any row has a different dimension from
    /// `dim`.
    pub fn predict(&self, x: &[SparseVec], dim: usize, exec: Exec) -> Result<Vec<Label>> {
        if let Some(r) = x.iter().find(|r| r.dim != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: r.dim });
        }
        Ok(exec.map_slice(x, |r| self.predict_one(r)))
    }
}

/// Predicts `x` and scores the predictions against `y`.
pub fn evaluate(model: &Classifier, dim: usize, x: &[SparseVec], y: &[Label], exec: Exec) -> Result<Metrics> {
    if x.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate on an empty test set".into()));
    }
    let p = model.predict(x, dim, exec)?;
    Metrics::compute(y, &p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Vec<SparseVec>, Vec<Label>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let j = (i / 2) as f64 * 0.05;
            if i % 2 == 0 {
                x.push(SparseVec::from_dense(&[1.0 + j, 0.2 - j / 2.0, 0.0]));
                y.push(Label::Entailment);
            } else {
                x.push(SparseVec::from_dense(&[0.1 + j / 3.0, 1.0 + j, 0.5]));
                y.push(Label::Contradiction);
            }
        }
        (x, y)
    }

    #[test]
    fn separable_toy_set_is_learned_by_everything() {
        let (x, y) = blobs();
        for alg in Algorithm::ALL {
            let m = train(&x, &y, &TrainConfig::new(alg), Exec::Sequential).unwrap();
            assert_eq!(m.algorithm(), alg);
            let met = evaluate(&m, 3, &x, &y, Exec::Sequential).unwrap();
            assert_eq!(met.accuracy, 1.0, "{alg}");
        }
    }

    #[test]
    fn single_class_rules() {
        let x = vec![SparseVec::from_dense(&[1.0]), SparseVec::from_dense(&[2.0])];
        let y = vec![Label::Neutral; 2];
        for alg in Algorithm::ALL {
            let r = train(&x, &y, &TrainConfig::new(alg), Exec::Sequential);
            if alg == Algorithm::Adaboost {
                assert!(r.is_err());
            } else {
                assert_eq!(r.unwrap().predict_one(&x[0]), Label::Neutral, "{alg}");
            }
        }
    }

    #[test]
    fn shape_errors() {
        let x = vec![SparseVec::from_dense(&[1.0]), SparseVec::zeros(2)];
        let cfg = TrainConfig::new(Algorithm::Dt);
        assert!(matches!(
            train(&x, &[Label::Neutral, Label::Entailment], &cfg, Exec::Sequential),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(train(&x[..1], &[], &cfg, Exec::Sequential).is_err());
        let m = train(&x[..1], &[Label::Neutral], &cfg, Exec::Sequential).unwrap();
        assert!(m.predict(&x, 1, Exec::Sequential).is_err());
    }

    #[test]
    fn config_parsing() {
        let c: TrainConfig = toml::from_str("algorithm = \"rf\"\n[hyperparams.rf]\ntrees = 7\n").unwrap();
        assert_eq!(c.hyperparams.rf.trees, 7);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert!(toml::from_str::<TrainConfig>("algorithm = \"rf\"\ncolour = 1\n").is_err());
        assert!(toml::from_str::<TrainConfig>("algorithm = \"rf\"\n[hyperparams.rf]\ntres = 7\n").is_err());
        let mut bad = TrainConfig::new(Algorithm::Knn);
        bad.hyperparams.knn.k = 0;
        assert!(bad.validate().is_err());
        assert_eq!("ADA".parse::<Algorithm>().unwrap(), Algorithm::Adaboost);
        assert!(matches!("svc".parse::<Algorithm>(), Err(Error::Config(_))));
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::from_tag(a.tag()), Some(a));
        }
    }

    #[test]
    fn argmax_prefers_lower_index() {
        assert_eq!(argmax(&[1.0, 1.0, 0.5]), 0);
        assert_eq!(argmax(&[0.0, 2.0, 2.0]), 1);
        assert_eq!(argmax(&[f64::NEG_INFINITY, -1.0, f64::NEG_INFINITY]), 1);
    }
}
