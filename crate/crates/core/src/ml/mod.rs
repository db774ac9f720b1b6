//! Binary classifiers, stratified cross-validation, grid search and metrics.
//!
//! The positive class is ADHD throughout. Tree families are C4.5-style and
//! reduced-error-pruned analogs; `logistic` is plain ridge logistic
//! regression; `instance_knn` is distance-weighted k-NN.

mod cv;
mod dataset;
mod knn;
mod logistic;
mod metrics;
mod tree;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::{floor, sqrt};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::rng::rng_for;

pub use cv::{
    assemble_report, cross_validate, default_grid, grid_points, grid_search, run_fold, select_best, stratified_folds, EvalReport,
    FoldMetrics, FoldOutcome, Grid, GridResult,
};
pub use dataset::{ColumnKind, Dataset};
pub use knn::KnnModel;
pub use logistic::LogisticModel;
pub use metrics::{evaluate_metrics, roc_auc, Confusion, Metrics};
pub use tree::{DecisionTree, Pruning, TreeParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MlError {
    #[error("malformed dataset: {0}")]
    Shape(String),
    #[error("training data holds a single class")]
    SingleClassTrain,
    #[error("k must be at least 2, got {0}")]
    BadK(usize),
    #[error("class {class} has {count} instances, fewer than k = {k}")]
    TooFewInstances { class: &'static str, count: usize, k: usize },
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error("scores hold a single class")]
    SingleClassScores,
    #[error("unknown classifier family {0:?}")]
    UnknownFamily(String),
    #[error("{family}: bad hyperparameter {name} = {value}")]
    BadHyper { family: &'static str, name: String, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    TreeC45Like,
    TreeRepPruned,
    RandomForest,
    BaggingTrees,
    Logistic,
    InstanceKnn,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::TreeC45Like,
        Family::TreeRepPruned,
        Family::RandomForest,
        Family::BaggingTrees,
        Family::Logistic,
        Family::InstanceKnn,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::TreeC45Like => "tree_c45_like",
            Family::TreeRepPruned => "tree_rep_pruned",
            Family::RandomForest => "random_forest",
            Family::BaggingTrees => "bagging_trees",
            Family::Logistic => "logistic",
            Family::InstanceKnn => "instance_knn",
        }
    }

    /// Accepted hyperparameters and their defaults.
    pub fn defaults(&self) -> &'static [(&'static str, f64)] {
        match self {
            Family::TreeC45Like => &[("confidence", 0.25), ("max_depth", f64::INFINITY), ("min_leaf", 2.0), ("pruned", 1.0)],
            Family::TreeRepPruned => &[("max_depth", f64::INFINITY), ("min_leaf", 2.0)],
            Family::RandomForest => &[
                ("bootstrap", 1.0),
                ("feature_subsample", 1.0),
                ("max_depth", f64::INFINITY),
                ("min_leaf", 1.0),
                ("n_trees", 100.0),
            ],
            Family::BaggingTrees => &[("bootstrap", 1.0), ("max_depth", f64::INFINITY), ("min_leaf", 1.0), ("n_trees", 10.0)],
            Family::Logistic => &[("l2", 0.1), ("max_iter", 100.0)],
            Family::InstanceKnn => &[("k", 5.0)],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| MlError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub family: Family,
    /// Overrides of [`Family::defaults`]; missing names take the default.
    pub hyper: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        Self { family, hyper: BTreeMap::new(), seed }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.hyper.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> f64 {
        self.hyper.get(name).copied().unwrap_or_else(|| {
            self.family
                .defaults()
                .iter()
                .find(|(n, _)| *n == name)
                .map(|p| p.1)
                .unwrap_or(f64::NAN)
        })
    }

    pub fn validate(&self) -> Result<(), MlError> {
        let bad = |name: &str, value: f64| MlError::BadHyper { family: self.family.as_str(), name: name.to_string(), value };
        let is_count = |v: f64| v >= 1.0 && v == floor(v) && v.is_finite();
        let is_flag = |v: f64| v == 0.0 || v == 1.0;
        for (name, &v) in &self.hyper {
            if !self.family.defaults().iter().any(|(n, _)| n == name) {
                return Err(bad(name, v));
            }
        }
        for &(name, _) in self.family.defaults() {
            let v = self.get(name);
            let ok = match name {
                "max_depth" => v == f64::INFINITY || is_count(v),
                "min_leaf" | "n_trees" | "k" | "max_iter" => is_count(v),
                "bootstrap" | "feature_subsample" | "pruned" => is_flag(v),
                "confidence" => v > 0.0 && v <= 0.5,
                "l2" => v >= 0.0 && v.is_finite(),
                _ => true,
            };
            if !ok {
                return Err(bad(name, v));
            }
        }
        Ok(())
    }

    fn tree_params(&self, pruning: Pruning, max_features: Option<usize>) -> TreeParams {
        let d = self.get("max_depth");
        TreeParams {
            max_depth: if d.is_finite() { Some(d as usize) } else { None },
            min_leaf: self.get("min_leaf") as usize,
            max_features,
            pruning,
        }
    }

    /// Stable textual form such as `random_forest[max_depth=inf,n_trees=50]`
    /// listing only explicit overrides.
    pub fn label(&self) -> String {
        let mut s = String::from(self.family.as_str());
        if !self.hyper.is_empty() {
            s.push('[');
            for (i, (k, v)) in self.hyper.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&alloc::format!("{k}={v}"));
            }
            s.push(']');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Constant { p_positive: f64 },
    Tree(DecisionTree),
    /// Scores are the fraction of members voting positive.
    Vote(Vec<DecisionTree>),
    Logistic(LogisticModel),
    Knn(KnnModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    /// Set when training saw a single class and fell back to a constant.
    pub single_class: bool,
}

impl Model {
    /// Probability-like score for the positive class.
    pub fn score(&self, row: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::Constant { p_positive } => *p_positive,
            ModelKind::Tree(t) => t.score(row),
            ModelKind::Vote(ts) => ts.iter().filter(|t| t.score(row) >= 0.5).count() as f64 / ts.len() as f64,
            ModelKind::Logistic(m) => m.score(row),
            ModelKind::Knn(m) => m.score(row),
        }
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        self.score(row) >= 0.5
    }
}

/// Trains `spec` on every row of `data`.
pub fn train_classifier(spec: &ClassifierSpec, data: &Dataset) -> Result<Model, MlError> {
    let idx: Vec<usize> = (0..data.len()).collect();
    train_on(spec, data, &idx)
}

pub(crate) fn train_on(spec: &ClassifierSpec, data: &Dataset, idx: &[usize]) -> Result<Model, MlError> {
    spec.validate()?;
    if idx.is_empty() {
        return Err(MlError::Shape("no training rows".into()));
    }
    let pos = idx.iter().filter(|&&i| data.labels[i]).count();
    if pos == 0 || pos == idx.len() {
        let p_positive = if pos == 0 { 0.0 } else { 1.0 };
        return Ok(Model { kind: ModelKind::Constant { p_positive }, single_class: true });
    }
    let mut rng = rng_for(spec.seed, &[0]);
    let kind = match spec.family {
        Family::TreeC45Like => {
            let pruning = if spec.get("pruned") == 1.0 {
                Pruning::Pessimistic { confidence: spec.get("confidence") }
            } else {
                Pruning::None
            };
            ModelKind::Tree(DecisionTree::fit(data, idx, &spec.tree_params(pruning, None), &mut rng))
        }
        Family::TreeRepPruned => {
            let mut shuffled = idx.to_vec();
            shuffled.shuffle(&mut rng);
            let n_prune = shuffled.len() / 3;
            let (prune, grow) = shuffled.split_at(n_prune);
            let mut grow = grow.to_vec();
            let mut prune = prune.to_vec();
            grow.sort_unstable();
            prune.sort_unstable();
            let p = spec.tree_params(Pruning::None, None);
            ModelKind::Tree(DecisionTree::fit_reduced_error(data, &grow, &prune, &p, &mut rng))
        }
        Family::RandomForest | Family::BaggingTrees => {
            let n_trees = spec.get("n_trees") as usize;
            let bootstrap = spec.get("bootstrap") == 1.0;
            let d = data.n_features();
            let max_features = (spec.family == Family::RandomForest && spec.get("feature_subsample") == 1.0)
                .then(|| (floor(sqrt(d as f64)) as usize).max(1));
            let p = spec.tree_params(Pruning::None, max_features);
            let trees = (0..n_trees)
                .map(|m| {
                    let mut r = rng_for(spec.seed, &[1, m as u64]);
                    let rows: Vec<usize> = if bootstrap {
                        let mut b: Vec<usize> = (0..idx.len()).map(|_| idx[r.random_range(0..idx.len())]).collect();
                        b.sort_unstable();
                        b
                    } else {
                        idx.to_vec()
                    };
                    DecisionTree::fit(data, &rows, &p, &mut r)
                })
                .collect();
            ModelKind::Vote(trees)
        }
        Family::Logistic => ModelKind::Logistic(LogisticModel::fit(data, idx, spec.get("l2"), spec.get("max_iter") as usize)),
        Family::InstanceKnn => ModelKind::Knn(KnnModel::fit(data, idx, spec.get("k") as usize)),
    };
    Ok(Model { kind, single_class: false })
}
