use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::seq::SliceRandom;

use super::dataset::Dataset;
use super::metrics::{evaluate_metrics, roc_auc, Confusion, Metrics};
use super::{train_on, ClassifierSpec, Family, MlError};
use crate::rng::{derive_seed, rng_for};

/// Assigns each instance to one of `k` folds. Each class is shuffled and
/// dealt round-robin, the second class continuing where the first stopped,
/// so per-class counts per fold differ by at most one and fold sizes too.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<usize>, MlError> {
    if k < 2 {
        return Err(MlError::BadK(k));
    }
    let mut fold = vec![0usize; labels.len()];
    let mut offset = 0;
    let mut rng = rng_for(seed, &[0xF01D]);
    for (class, name) in [(true, "ADHD"), (false, "NonADHD")] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(MlError::TooFewInstances { class: name, count: members.len(), k });
        }
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            fold[i] = (offset + j) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test: Vec<usize>,
    pub scores: Vec<f64>,
    /// The fold's training data held one class only.
    pub single_class: bool,
}

/// Trains on every fold but `fold` and scores the held-out rows.
pub fn run_fold(spec: &ClassifierSpec, data: &Dataset, folds: &[usize], fold: usize, seed: u64) -> Result<FoldOutcome, MlError> {
    let train: Vec<usize> = (0..data.len()).filter(|&i| folds[i] != fold).collect();
    let test: Vec<usize> = (0..data.len()).filter(|&i| folds[i] == fold).collect();
    let mut s = spec.clone();
    s.seed = derive_seed(seed, &[1, fold as u64, spec.seed]);
    let model = train_on(&s, data, &train)?;
    let scores = test.iter().map(|&i| model.score(&data.rows[i])).collect();
    Ok(FoldOutcome { fold, test, scores, single_class: model.single_class })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n_test: usize,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub k: usize,
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision_w: f64,
    pub recall_w: f64,
    pub f1_w: f64,
    pub roc_points: Vec<(f64, f64)>,
    pub auc: f64,
    pub per_fold: Vec<FoldMetrics>,
}

impl EvalReport {
    pub fn metrics(&self) -> Metrics {
        Metrics { accuracy: self.accuracy, precision_w: self.precision_w, recall_w: self.recall_w, f1_w: self.f1_w }
    }

    /// Full-precision textual dump; equal reports give equal bytes.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let c = &self.confusion;
        let _ = writeln!(s, "k={} tp={} fn={} fp={} tn={}", self.k, c.tp, c.fn_, c.fp, c.tn);
        let _ = writeln!(
            s,
            "accuracy={:?} precision_w={:?} recall_w={:?} f1_w={:?} auc={:?}",
            self.accuracy, self.precision_w, self.recall_w, self.f1_w, self.auc
        );
        for f in &self.per_fold {
            let m = &f.metrics;
            let _ = writeln!(
                s,
                "fold={} n={} tp={} fn={} fp={} tn={} accuracy={:?} precision_w={:?} recall_w={:?} f1_w={:?}",
                f.fold, f.n_test, f.confusion.tp, f.confusion.fn_, f.confusion.fp, f.confusion.tn, m.accuracy, m.precision_w, m.recall_w, m.f1_w
            );
        }
        for (x, y) in &self.roc_points {
            let _ = writeln!(s, "roc {x:?} {y:?}");
        }
        s
    }
}

/// Pools fold outcomes into a report. Outcomes may arrive in any order.
pub fn assemble_report(data: &Dataset, k: usize, outcomes: &[FoldOutcome]) -> Result<EvalReport, MlError> {
    let mut outcomes: Vec<&FoldOutcome> = outcomes.iter().collect();
    outcomes.sort_by_key(|o| o.fold);
    let mut pooled = Confusion::default();
    let mut scored = Vec::with_capacity(data.len());
    let mut per_fold = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let mut c = Confusion::default();
        for (&i, &s) in o.test.iter().zip(&o.scores) {
            c.record(data.labels[i], s >= 0.5);
            pooled.record(data.labels[i], s >= 0.5);
            scored.push((s, data.labels[i]));
        }
        per_fold.push(FoldMetrics { fold: o.fold, n_test: o.test.len(), confusion: c, metrics: evaluate_metrics(&c) });
    }
    let m = evaluate_metrics(&pooled);
    let (roc_points, auc) = roc_auc(&scored)?;
    Ok(EvalReport {
        k,
        confusion: pooled,
        accuracy: m.accuracy,
        precision_w: m.precision_w,
        recall_w: m.recall_w,
        f1_w: m.f1_w,
        roc_points,
        auc,
        per_fold,
    })
}

/// Stratified k-fold cross-validation with pooled out-of-fold predictions.
pub fn cross_validate(spec: &ClassifierSpec, data: &Dataset, k: usize, seed: u64) -> Result<EvalReport, MlError> {
    spec.validate()?;
    let folds = stratified_folds(&data.labels, k, seed)?;
    let outcomes = (0..k).map(|f| run_fold(spec, data, &folds, f, seed)).collect::<Result<Vec<_>, _>>()?;
    assemble_report(data, k, &outcomes)
}

/// Hyperparameter name to candidate values.
pub type Grid = BTreeMap<String, Vec<f64>>;

pub fn default_grid(family: Family) -> Grid {
    let g = |pairs: &[(&str, &[f64])]| pairs.iter().map(|(n, v)| (n.to_string(), v.to_vec())).collect::<Grid>();
    match family {
        Family::TreeC45Like | Family::TreeRepPruned => g(&[("max_depth", &[2.0, 4.0, 8.0, f64::INFINITY]), ("min_leaf", &[1.0, 2.0, 5.0])]),
        Family::RandomForest | Family::BaggingTrees => g(&[("n_trees", &[50.0, 100.0, 200.0])]),
        Family::InstanceKnn => g(&[("k", &[1.0, 3.0, 5.0, 7.0])]),
        Family::Logistic => g(&[("l2", &[0.01, 0.1, 1.0])]),
    }
}

/// Cartesian product of `grid` with names in lexicographic order and the
/// last name varying fastest.
pub fn grid_points(family: Family, grid: &Grid, seed: u64) -> Result<Vec<ClassifierSpec>, MlError> {
    if grid.is_empty() || grid.values().any(|v| v.is_empty()) {
        return Err(MlError::EmptyGrid);
    }
    let names: Vec<&String> = grid.keys().collect();
    let sizes: Vec<usize> = grid.values().map(|v| v.len()).collect();
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    for mut n in 0..total {
        let mut pick = vec![0usize; names.len()];
        for j in (0..names.len()).rev() {
            pick[j] = n % sizes[j];
            n /= sizes[j];
        }
        let mut spec = ClassifierSpec::new(family, seed);
        for (j, name) in names.iter().enumerate() {
            spec.hyper.insert((*name).clone(), grid[*name][pick[j]]);
        }
        spec.validate()?;
        out.push(spec);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: ClassifierSpec,
    pub report: EvalReport,
    pub n_evaluations: usize,
}

/// Highest accuracy wins, then higher weighted F1; remaining ties keep the
/// earliest point in grid order.
pub fn select_best(evaluated: Vec<(ClassifierSpec, EvalReport)>) -> Result<GridResult, MlError> {
    let n_evaluations = evaluated.len();
    let mut best: Option<(ClassifierSpec, EvalReport)> = None;
    for (spec, rep) in evaluated {
        let better = match &best {
            None => true,
            Some((_, b)) => rep.accuracy > b.accuracy || (rep.accuracy == b.accuracy && rep.f1_w > b.f1_w),
        };
        if better {
            best = Some((spec, rep));
        }
    }
    let (best, report) = best.ok_or(MlError::EmptyGrid)?;
    Ok(GridResult { best, report, n_evaluations })
}

pub fn grid_search(family: Family, grid: &Grid, data: &Dataset, k: usize, seed: u64) -> Result<GridResult, MlError> {
    let points = grid_points(family, grid, seed)?;
    let evaluated = points
        .into_iter()
        .map(|s| cross_validate(&s, data, k, seed).map(|r| (s, r)))
        .collect::<Result<Vec<_>, _>>()?;
    select_best(evaluated)
}
