use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, fabs, sqrt};

use super::dataset::{ColumnKind, Dataset};

#[derive(Debug, Clone, PartialEq)]
enum Encoded {
    Numeric { mean: f64, scale: f64 },
    OneHot { levels: usize },
}

/// Ridge-penalized logistic regression fitted by damped Newton steps.
/// Numeric columns are standardized on the training rows and nominal
/// columns one-hot encoded; the intercept is not penalized.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    encoders: Vec<Encoded>,
    /// `weights[0]` is the intercept.
    weights: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// log(1 + exp(z)) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(exp(-z))
    } else {
        libm::log1p(exp(z))
    }
}

impl LogisticModel {
    pub fn fit(data: &Dataset, idx: &[usize], l2: f64, max_iter: usize) -> Self {
        let encoders: Vec<Encoded> = data
            .kinds
            .iter()
            .enumerate()
            .map(|(f, k)| match *k {
                ColumnKind::Nominal { levels } => Encoded::OneHot { levels },
                ColumnKind::Numeric => {
                    let n = idx.len() as f64;
                    let mean = idx.iter().map(|&i| data.rows[i][f]).sum::<f64>() / n;
                    let var = idx.iter().map(|&i| (data.rows[i][f] - mean) * (data.rows[i][f] - mean)).sum::<f64>() / n;
                    let sd = sqrt(var);
                    Encoded::Numeric { mean, scale: if sd > 0.0 { sd } else { 1.0 } }
                }
            })
            .collect();
        let mut m = LogisticModel { encoders, weights: Vec::new() };
        let xs: Vec<Vec<f64>> = idx.iter().map(|&i| m.encode(&data.rows[i])).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| if data.labels[i] { 1.0 } else { 0.0 }).collect();
        let p = xs[0].len();
        let mut w = vec![0.0; p];
        let loss = |w: &[f64]| -> f64 {
            let mut l = 0.0;
            for (x, &y) in xs.iter().zip(&ys) {
                let z = dot(w, x);
                l += softplus(z) - y * z;
            }
            l + 0.5 * l2 * w[1..].iter().map(|v| v * v).sum::<f64>()
        };
        let mut current = loss(&w);
        for _ in 0..max_iter {
            let mut g = vec![0.0; p];
            let mut h = vec![vec![0.0; p]; p];
            for (x, &y) in xs.iter().zip(&ys) {
                let mu = sigmoid(dot(&w, x));
                let r = mu - y;
                let s = (mu * (1.0 - mu)).max(1e-10);
                for a in 0..p {
                    g[a] += r * x[a];
                    for b in 0..=a {
                        h[a][b] += s * x[a] * x[b];
                    }
                }
            }
            for a in 1..p {
                g[a] += l2 * w[a];
                h[a][a] += l2;
            }
            // Tiny ridge keeps the system definite when l2 = 0 or columns are constant.
            for (a, row) in h.iter_mut().enumerate() {
                row[a] += 1e-9;
            }
            let Some(step) = cholesky_solve(&h, &g) else { break };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cand: Vec<f64> = w.iter().zip(&step).map(|(wi, si)| wi - t * si).collect();
                let l = loss(&cand);
                if l <= current {
                    w = cand;
                    accepted = current - l > 1e-12 * (1.0 + fabs(current));
                    current = l;
                    break;
                }
                t *= 0.5;
            }
            if !accepted || step.iter().map(|v| fabs(v * t)).fold(0.0, f64::max) < 1e-9 {
                break;
            }
        }
        m.weights = w;
        m
    }

    fn encode(&self, row: &[f64]) -> Vec<f64> {
        let mut x = vec![1.0];
        for (v, e) in row.iter().zip(&self.encoders) {
            match *e {
                Encoded::Numeric { mean, scale } => x.push((v - mean) / scale),
                Encoded::OneHot { levels } => {
                    for l in 0..levels {
                        x.push(if *v as usize == l { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        x
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, &self.encode(row)))
    }

    pub fn intercept(&self) -> f64 {
        self.weights[0]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `h x = g` for symmetric positive-definite `h` given by its lower triangle.
fn cholesky_solve(h: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i][i] = sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s = g[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>();
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s = y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>();
        x[i] = s / l[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_only_matches_base_rate() {
        // A constant feature carries no information: the fit is the log-odds.
        let rows = vec![vec![1.0]; 10];
        let labels = vec![true, true, true, false, false, false, false, false, false, false];
        let d = Dataset::new(vec!["c".into()], vec![ColumnKind::Numeric], rows, labels).unwrap();
        let idx: Vec<usize> = (0..10).collect();
        let m = LogisticModel::fit(&d, &idx, 1.0, 100);
        assert!((m.intercept() - libm::log(3.0 / 7.0)).abs() < 1e-7);
        assert!((m.score(&[1.0]) - 0.3).abs() < 1e-7);
    }

    #[test]
    fn monotone_in_informative_feature() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let labels: Vec<bool> = (0..20).map(|i| i >= 8 && i != 12).collect();
        let d = Dataset::new(vec!["x".into()], vec![ColumnKind::Numeric], rows, labels).unwrap();
        let idx: Vec<usize> = (0..20).collect();
        let m = LogisticModel::fit(&d, &idx, 0.1, 100);
        assert!(m.score(&[0.0]) < 0.2 && m.score(&[19.0]) > 0.8);
        assert!(m.score(&[5.0]) < m.score(&[6.0]));
    }
}
