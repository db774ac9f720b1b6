use alloc::vec;
use alloc::vec::Vec;

use super::MlError;

/// 2×2 confusion counts with ADHD as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_predictions(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = Confusion::default();
        for (truth, pred) in pairs {
            c.record(truth, pred);
        }
        c
    }

    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn n(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision_w: f64,
    pub recall_w: f64,
    pub f1_w: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Accuracy plus precision, recall and F1 averaged over both classes with
/// true-support weights. Undefined ratios count as 0.
pub fn evaluate_metrics(c: &Confusion) -> Metrics {
    let n = c.n();
    // (true positives, predicted count, support) for each class
    let classes = [(c.tp, c.tp + c.fp, c.tp + c.fn_), (c.tn, c.tn + c.fn_, c.tn + c.fp)];
    let (mut p_w, mut r_w, mut f_w) = (0.0, 0.0, 0.0);
    for (hit, predicted, support) in classes {
        let p = ratio(hit, predicted);
        let r = ratio(hit, support);
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let w = ratio(support, n);
        p_w += w * p;
        r_w += w * r;
        f_w += w * f;
    }
    Metrics { accuracy: ratio(c.tp + c.tn, n), precision_w: p_w, recall_w: r_w, f1_w: f_w }
}

/// ROC points (fpr, tpr) from (0,0) to (1,1), sweeping the threshold down
/// through distinct scores, and the trapezoidal area under them.
pub fn roc_auc(scores: &[(f64, bool)]) -> Result<(Vec<(f64, f64)>, f64), MlError> {
    let n_pos = scores.iter().filter(|s| s.1).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MlError::SingleClassScores);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut pts = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let s = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == s {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (x0, y0) = *pts.last().unwrap();
        let p = (fp as f64 / n_neg as f64, tp as f64 / n_pos as f64);
        auc += (p.0 - x0) * (p.1 + y0) * 0.5;
        pts.push(p);
    }
    Ok((pts, auc))
}
