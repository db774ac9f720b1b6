//! Binary decision trees split on information-gain ratio.
//!
//! Numeric columns split on `x <= threshold` at midpoints between adjacent
//! distinct values; nominal columns split on `x == level`. Candidate
//! attributes must reach the mean gain of all candidates at the node, and
//! the one with the best gain ratio among them wins (the C4.5 heuristic).
//! Optional pruning is either pessimistic (C4.5 upper confidence bound) or
//! reduced-error on a held-out set.

use alloc::vec;
use alloc::vec::Vec;

use libm::{log2, sqrt};
use rand::seq::index::sample;
use rand::Rng;

use super::dataset::{ColumnKind, Dataset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pruning {
    None,
    /// C4.5 subtree replacement with the given confidence factor.
    Pessimistic { confidence: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features drawn at random per node; `None` uses all of them.
    pub max_features: Option<usize>,
    pub pruning: Pruning,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: None, min_leaf: 1, max_features: None, pruning: Pruning::None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Test {
    Le(f64),
    Eq(f64),
}

impl Test {
    fn goes_left(&self, v: f64) -> bool {
        match *self {
            Test::Le(t) => v <= t,
            Test::Eq(l) => v == l,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { pos: f64, neg: f64 },
    Split { feature: usize, test: Test, left: usize, right: usize, pos: f64, neg: f64 },
}

impl Node {
    fn counts(&self) -> (f64, f64) {
        match *self {
            Node::Leaf { pos, neg } | Node::Split { pos, neg, .. } => (pos, neg),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

fn entropy(p: f64, n: f64) -> f64 {
    let t = p + n;
    if t == 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for c in [p, n] {
        if c > 0.0 {
            let q = c / t;
            h -= q * log2(q);
        }
    }
    h
}

struct Candidate {
    feature: usize,
    test: Test,
    gain: f64,
    ratio: f64,
}

fn score_split(pl: f64, nl: f64, pr: f64, nr: f64) -> (f64, f64) {
    let (l, r) = (pl + nl, pr + nr);
    let n = l + r;
    let gain = entropy(pl + pr, nl + nr) - (l / n) * entropy(pl, nl) - (r / n) * entropy(pr, nr);
    let split_info = entropy(l, r);
    let gain = gain.max(0.0);
    (gain, if split_info > 0.0 { gain / split_info } else { 0.0 })
}

impl DecisionTree {
    pub fn fit<R: Rng>(data: &Dataset, idx: &[usize], params: &TreeParams, rng: &mut R) -> Self {
        let mut tree = DecisionTree { nodes: Vec::new() };
        tree.grow(data, idx.to_vec(), params, rng);
        if let Pruning::Pessimistic { confidence } = params.pruning {
            tree.prune_pessimistic(z_for_confidence(confidence));
        }
        tree
    }

    /// Grows on `grow`, prunes by reduced error on `prune`, then refits leaf
    /// counts with both sets.
    pub fn fit_reduced_error<R: Rng>(data: &Dataset, grow: &[usize], prune: &[usize], params: &TreeParams, rng: &mut R) -> Self {
        let mut tree = DecisionTree { nodes: Vec::new() };
        tree.grow(data, grow.to_vec(), params, rng);
        if !prune.is_empty() {
            tree.prune_reduced_error(data, prune);
        }
        let all: Vec<usize> = grow.iter().chain(prune).copied().collect();
        tree.backfit(data, &all);
        tree
    }

    /// Depth-first growth with an explicit stack. Nodes are numbered in
    /// preorder, so every child has a larger id than its parent.
    fn grow<R: Rng>(&mut self, data: &Dataset, idx: Vec<usize>, p: &TreeParams, rng: &mut R) {
        // (parent id and side, rows, depth)
        let mut stack: Vec<(Option<(usize, bool)>, Vec<usize>, usize)> = vec![(None, idx, 0)];
        while let Some((parent, idx, depth)) = stack.pop() {
            let pos = idx.iter().filter(|&&i| data.labels[i]).count() as f64;
            let neg = idx.len() as f64 - pos;
            let id = self.nodes.len();
            self.nodes.push(Node::Leaf { pos, neg });
            if let Some((pid, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut self.nodes[pid] {
                    if is_left {
                        *left = id;
                    } else {
                        *right = id;
                    }
                }
            }
            let pure = pos == 0.0 || neg == 0.0;
            let depth_ok = p.max_depth.is_none_or(|d| depth < d);
            if pure || !depth_ok || idx.len() < 2 * p.min_leaf.max(1) {
                continue;
            }
            let Some(best) = best_split(data, &idx, p, rng) else {
                continue;
            };
            let (li, ri): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| best.test.goes_left(data.rows[i][best.feature]));
            if li.is_empty() || ri.is_empty() {
                continue;
            }
            self.nodes[id] = Node::Split { feature: best.feature, test: best.test, left: usize::MAX, right: usize::MAX, pos, neg };
            stack.push((Some((id, false)), ri, depth + 1));
            stack.push((Some((id, true)), li, depth + 1));
        }
    }

    fn leaf_of(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, test, left, right, .. } => {
                    i = if test.goes_left(row[feature]) { left } else { right };
                }
            }
        }
    }

    /// Positive-class frequency at the leaf reached by `row`.
    pub fn score(&self, row: &[f64]) -> f64 {
        let (pos, neg) = self.nodes[self.leaf_of(row)].counts();
        if pos + neg == 0.0 {
            0.5
        } else {
            pos / (pos + neg)
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.reachable().filter(|&i| matches!(self.nodes[i], Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for i in self.reachable() {
            if let Node::Split { left, right, .. } = self.nodes[i] {
                d[left] = d[i] + 1;
                d[right] = d[i] + 1;
                max = max.max(d[i] + 1);
            }
        }
        max
    }

    /// Reachable node ids in preorder.
    fn reachable(&self) -> impl Iterator<Item = usize> + '_ {
        let mut stack = vec![0usize];
        core::iter::from_fn(move || {
            let i = stack.pop()?;
            if let Node::Split { left, right, .. } = self.nodes[i] {
                stack.push(right);
                stack.push(left);
            }
            Some(i)
        })
    }

    /// Bottom-up subtree replacement: a subtree becomes a leaf when the
    /// leaf's estimated errors do not exceed the subtree's (plus 0.1).
    fn prune_pessimistic(&mut self, z: f64) {
        let mut est = vec![0.0f64; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            let (pos, neg) = self.nodes[i].counts();
            let leaf_est = pessimistic_errors(pos + neg, pos.min(neg), z);
            est[i] = match self.nodes[i] {
                Node::Leaf { .. } => leaf_est,
                Node::Split { left, right, .. } => {
                    let sub = est[left] + est[right];
                    if leaf_est <= sub + 0.1 {
                        self.nodes[i] = Node::Leaf { pos, neg };
                        leaf_est
                    } else {
                        sub
                    }
                }
            };
        }
    }

    /// Bottom-up: a subtree becomes a leaf when that makes no more errors on
    /// the held-out rows.
    fn prune_reduced_error(&mut self, data: &Dataset, held: &[usize]) {
        let n = self.nodes.len();
        let mut leaf_err = vec![0usize; n];
        for &j in held {
            let mut i = 0;
            loop {
                let (pos, neg) = self.nodes[i].counts();
                if data.labels[j] != (pos >= neg) {
                    leaf_err[i] += 1;
                }
                match self.nodes[i] {
                    Node::Leaf { .. } => break,
                    Node::Split { feature, test, left, right, .. } => {
                        i = if test.goes_left(data.rows[j][feature]) { left } else { right };
                    }
                }
            }
        }
        let mut sub = vec![0usize; n];
        for i in (0..n).rev() {
            sub[i] = match self.nodes[i] {
                Node::Leaf { .. } => leaf_err[i],
                Node::Split { left, right, pos, neg, .. } => {
                    let s = sub[left] + sub[right];
                    if leaf_err[i] <= s {
                        self.nodes[i] = Node::Leaf { pos, neg };
                        leaf_err[i]
                    } else {
                        s
                    }
                }
            };
        }
    }

    fn backfit(&mut self, data: &Dataset, idx: &[usize]) {
        for n in &mut self.nodes {
            match n {
                Node::Leaf { pos, neg } | Node::Split { pos, neg, .. } => {
                    *pos = 0.0;
                    *neg = 0.0;
                }
            }
        }
        for &j in idx {
            let mut i = 0;
            loop {
                let next = match &mut self.nodes[i] {
                    Node::Leaf { pos, neg } => {
                        if data.labels[j] { *pos += 1.0 } else { *neg += 1.0 }
                        None
                    }
                    Node::Split { feature, test, left, right, pos, neg } => {
                        if data.labels[j] { *pos += 1.0 } else { *neg += 1.0 }
                        Some(if test.goes_left(data.rows[j][*feature]) { *left } else { *right })
                    }
                };
                match next {
                    Some(n) => i = n,
                    None => break,
                }
            }
        }
    }
}

fn best_split<R: Rng>(data: &Dataset, idx: &[usize], p: &TreeParams, rng: &mut R) -> Option<Candidate> {
    let d = data.n_features();
    let features: Vec<usize> = match p.max_features {
        Some(m) if m < d => {
            let mut f = sample(rng, d, m.max(1)).into_vec();
            f.sort_unstable();
            f
        }
        _ => (0..d).collect(),
    };
    let min_leaf = p.min_leaf.max(1) as f64;
    let mut cands: Vec<Candidate> = Vec::new();
    for &f in &features {
        let c = match data.kinds[f] {
            ColumnKind::Numeric => best_numeric(data, idx, f, min_leaf),
            ColumnKind::Nominal { levels } => best_nominal(data, idx, f, levels, min_leaf),
        };
        cands.extend(c);
    }
    if cands.is_empty() {
        return None;
    }
    let avg = cands.iter().map(|c| c.gain).sum::<f64>() / cands.len() as f64;
    let mut best: Option<Candidate> = None;
    for c in cands.into_iter().filter(|c| c.gain >= avg - 1e-12) {
        if best.as_ref().is_none_or(|b| c.ratio > b.ratio) {
            best = Some(c);
        }
    }
    best
}

fn best_numeric(data: &Dataset, idx: &[usize], f: usize, min_leaf: f64) -> Option<Candidate> {
    let mut vals: Vec<(f64, bool)> = idx.iter().map(|&i| (data.rows[i][f], data.labels[i])).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tot_p = vals.iter().filter(|v| v.1).count() as f64;
    let tot_n = vals.len() as f64 - tot_p;
    let (mut pl, mut nl) = (0.0, 0.0);
    let mut best: Option<Candidate> = None;
    for k in 0..vals.len() - 1 {
        if vals[k].1 { pl += 1.0 } else { nl += 1.0 }
        if vals[k].0 == vals[k + 1].0 {
            continue;
        }
        if pl + nl < min_leaf || ((vals.len() - k - 1) as f64) < min_leaf {
            continue;
        }
        let (gain, ratio) = score_split(pl, nl, tot_p - pl, tot_n - nl);
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            let mut thr = 0.5 * (vals[k].0 + vals[k + 1].0);
            // Adjacent floats: the midpoint may round up to the larger value.
            if thr >= vals[k + 1].0 {
                thr = vals[k].0;
            }
            best = Some(Candidate { feature: f, test: Test::Le(thr), gain, ratio });
        }
    }
    best
}

fn best_nominal(data: &Dataset, idx: &[usize], f: usize, levels: usize, min_leaf: f64) -> Option<Candidate> {
    let mut counts = vec![(0.0f64, 0.0f64); levels];
    for &i in idx {
        let c = &mut counts[data.rows[i][f] as usize];
        if data.labels[i] { c.0 += 1.0 } else { c.1 += 1.0 }
    }
    let (tp, tn) = counts.iter().fold((0.0, 0.0), |a, c| (a.0 + c.0, a.1 + c.1));
    let mut best: Option<Candidate> = None;
    for (lvl, &(p, n)) in counts.iter().enumerate() {
        let rest = tp + tn - p - n;
        if p + n < min_leaf || rest < min_leaf {
            continue;
        }
        let (gain, ratio) = score_split(p, n, tp - p, tn - n);
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            best = Some(Candidate { feature: f, test: Test::Eq(lvl as f64), gain, ratio });
        }
    }
    best
}

/// One-sided normal quantile for the C4.5 confidence factor.
fn z_for_confidence(cf: f64) -> f64 {
    // Acklam's rational approximation of the inverse normal CDF at 1 - cf.
    inverse_normal_cdf(1.0 - cf)
}

fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [-3.969683028665376e1, 2.209460984245205e2, -2.759285104469687e2, 1.38357751867269e2, -3.066479806614716e1, 2.506628277459239];
    const B: [f64; 5] = [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [-7.784894002430293e-3, -3.223964580411365e-1, -2.400758277161838, -2.549732539343734, 4.374664141464968, 2.938163982698783];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let plow = 0.02425;
    if p < plow {
        let q = sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}

/// Upper confidence bound on the error count of a leaf with `n` cases and
/// `e` training errors (normal approximation to the binomial).
fn pessimistic_errors(n: f64, e: f64, z: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let f = e / n;
    let z2 = z * z;
    let ub = (f + z2 / (2.0 * n) + z * sqrt((f / n - f * f / n + z2 / (4.0 * n * n)).max(0.0))) / (1.0 + z2 / n);
    n * ub
}
