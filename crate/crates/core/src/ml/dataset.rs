use alloc::string::String;
use alloc::vec::Vec;

use super::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    /// Values are level indices `0..levels`.
    Nominal { levels: usize },
}

/// Dense binary-labelled design matrix. `labels[i]` is true for the
/// positive class (ADHD).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl Dataset {
    pub fn new(names: Vec<String>, kinds: Vec<ColumnKind>, rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self, MlError> {
        if names.len() != kinds.len() {
            return Err(MlError::Shape("names and kinds differ in length".into()));
        }
        if rows.len() != labels.len() {
            return Err(MlError::Shape("rows and labels differ in length".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != kinds.len() {
                return Err(MlError::Shape(alloc::format!("row {i} has {} values, expected {}", r.len(), kinds.len())));
            }
            for (v, k) in r.iter().zip(&kinds) {
                let ok = match k {
                    ColumnKind::Numeric => v.is_finite(),
                    ColumnKind::Nominal { levels } => *v >= 0.0 && (*v as usize) < *levels && *v == libm::floor(*v),
                };
                if !ok {
                    return Err(MlError::Shape(alloc::format!("row {i} holds invalid value {v}")));
                }
            }
        }
        Ok(Self { names, kinds, rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.kinds.len()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn n_negative(&self) -> usize {
        self.len() - self.n_positive()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// A copy with every label flipped.
    pub fn with_swapped_labels(&self) -> Dataset {
        let mut d = self.clone();
        d.labels.iter_mut().for_each(|l| *l = !*l);
        d
    }
}
