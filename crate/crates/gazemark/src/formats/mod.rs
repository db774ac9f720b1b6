//! Text file formats read and written by the pipeline.
//!
//! Floats are written with the shortest representation that parses back to
//! the same value, so every export round-trips bit for bit.

pub mod aoi;
pub mod events;
pub mod gaze;
pub mod meta;
pub mod reports;
pub mod table;

use std::collections::HashMap;

pub(crate) fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Header name to field index.
pub(crate) struct Columns(HashMap<String, usize>);

impl Columns {
    pub fn new(headers: &csv::StringRecord) -> Self {
        Columns(headers.iter().enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect())
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.0.get(name).copied()
    }

    pub fn first_missing<'a>(&self, required: &[&'a str]) -> Option<&'a str> {
        required.iter().copied().find(|c| !self.0.contains_key(*c))
    }

    /// The named field, or "" when the column or field is absent.
    pub fn get<'r>(&self, rec: &'r csv::StringRecord, name: &str) -> &'r str {
        self.index(name).and_then(|i| rec.get(i)).unwrap_or("")
    }
}
