//! Participant metadata CSV: `participant_id,age,gender,label`.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use gazemark_core::ingest::ParticipantMeta;
use thiserror::Error;

use super::Columns;

pub const META_COLUMNS: [&str; 4] = ["participant_id", "age", "gender", "label"];

#[derive(Debug, Error)]
pub enum MetaError {
    #[error("metadata is missing column `{0}`")]
    MissingColumn(String),
    #[error("metadata line {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("participant {0} listed twice")]
    Duplicate(String),
    #[error("metadata lists no participants")]
    Empty,
    #[error("unreadable metadata CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub fn parse_meta_csv<R: Read>(input: R) -> Result<Vec<ParticipantMeta>, MetaError> {
    let mut reader = csv::Reader::from_reader(input);
    let cols = Columns::new(reader.headers()?);
    if let Some(m) = cols.first_missing(&META_COLUMNS) {
        return Err(MetaError::MissingColumn(m.into()));
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |reason: String| MetaError::BadRow { line, reason };
        let id = cols.get(&rec, "participant_id").trim().to_string();
        if id.is_empty() {
            return Err(bad("participant_id is empty".into()));
        }
        let age = cols.get(&rec, "age").trim().parse().map_err(|_| bad(format!("bad age `{}`", cols.get(&rec, "age"))))?;
        let gender = cols.get(&rec, "gender").parse().map_err(|e| bad(format!("gender: {e}")))?;
        let label = cols.get(&rec, "label").parse().map_err(|e| bad(format!("label: {e}")))?;
        if !seen.insert(id.clone()) {
            return Err(MetaError::Duplicate(id));
        }
        out.push(ParticipantMeta { id, age, gender, label });
    }
    if out.is_empty() {
        return Err(MetaError::Empty);
    }
    Ok(out)
}

pub fn write_meta_csv<W: Write>(out: W, meta: &[ParticipantMeta]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(META_COLUMNS)?;
    for m in meta {
        w.write_record([m.id.as_str(), &m.age.to_string(), m.gender.as_str(), m.label.as_str()])?;
    }
    w.flush()?;
    Ok(())
}
