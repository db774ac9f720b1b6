use alloc::vec::Vec;

use libm::sqrt;

use super::dataset::{ColumnKind, Dataset};

/// Distance-weighted k-nearest-neighbour scorer. Numeric columns are scaled
/// to [0, 1] by the training range; a nominal mismatch costs 1.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    k: usize,
    kinds: Vec<ColumnKind>,
    lo: Vec<f64>,
    span: Vec<f64>,
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
}

impl KnnModel {
    pub fn fit(data: &Dataset, idx: &[usize], k: usize) -> Self {
        let d = data.n_features();
        let mut lo = alloc::vec![f64::INFINITY; d];
        let mut hi = alloc::vec![f64::NEG_INFINITY; d];
        for &i in idx {
            for f in 0..d {
                lo[f] = lo[f].min(data.rows[i][f]);
                hi[f] = hi[f].max(data.rows[i][f]);
            }
        }
        let span = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
        Self {
            k,
            kinds: data.kinds.clone(),
            lo,
            span,
            rows: idx.iter().map(|&i| data.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| data.labels[i]).collect(),
        }
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for f in 0..a.len() {
            let d = match self.kinds[f] {
                ColumnKind::Nominal { .. } => {
                    if a[f] == b[f] {
                        0.0
                    } else {
                        1.0
                    }
                }
                ColumnKind::Numeric => {
                    if self.span[f] > 0.0 {
                        let na = ((a[f] - self.lo[f]) / self.span[f]).clamp(0.0, 1.0);
                        let nb = (b[f] - self.lo[f]) / self.span[f];
                        na - nb
                    } else {
                        0.0
                    }
                }
            };
            s += d * d;
        }
        sqrt(s)
    }

    /// Weighted fraction of positive neighbours with weights 1/distance.
    /// Exact matches, when present among the k nearest, outvote everything
    /// else and share the vote equally.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = self.rows.iter().enumerate().map(|(i, r)| (self.distance(row, r), i)).collect();
        let k = self.k.min(d.len());
        d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let near = &d[..k];
        let exact: Vec<usize> = near.iter().filter(|n| n.0 == 0.0).map(|n| n.1).collect();
        if !exact.is_empty() {
            return exact.iter().filter(|&&i| self.labels[i]).count() as f64 / exact.len() as f64;
        }
        let (mut pos, mut tot) = (0.0, 0.0);
        for &(dist, i) in near {
            let w = 1.0 / dist;
            tot += w;
            if self.labels[i] {
                pos += w;
            }
        }
        pos / tot
    }
}
