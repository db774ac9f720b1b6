//! Report and plot-data CSVs, plus the reading-span recall log.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use gazemark_core::ingest::ParticipantMeta;
use gazemark_core::mainseq::DeviationReport;
use gazemark_core::ml::{EvalReport, Family};
use gazemark_core::stats::{RspanResult, SetRecall, TTest, TVariant, Tail};
use thiserror::Error;

use super::{fmt_f64, Columns};

/// One row per family: `classifier,Precision,Recall,F1,Accuracy,AUC`.
pub fn write_classification_report<W: Write>(out: W, rows: &[(Family, EvalReport)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["classifier", "Precision", "Recall", "F1", "Accuracy", "AUC"])?;
    for (f, r) in rows {
        w.write_record([f.as_str().to_string(), fmt_f64(r.precision_w), fmt_f64(r.recall_w), fmt_f64(r.f1_w), fmt_f64(r.accuracy), fmt_f64(r.auc)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_roc<W: Write>(out: W, points: &[(f64, f64)]) -> csv::Result<()> {
    write_pairs(out, ["fpr", "tpr"], points)
}

pub fn write_pairs<W: Write>(out: W, header: [&str; 2], points: &[(f64, f64)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for &(a, b) in points {
        w.write_record([fmt_f64(a), fmt_f64(b)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mainseq_report<W: Write>(out: W, reports: &[DeviationReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "group",
        "n_saccades",
        "n_outliers",
        "theta_max_dps",
        "c_deg",
        "slope_ms_per_deg",
        "intercept_ms",
        "rmse_velocity_dps",
        "rmse_duration_ms",
    ])?;
    for r in reports {
        let m = &r.fitted.model;
        w.write_record([
            r.group.as_str().to_string(),
            r.n_saccades.to_string(),
            r.fitted.n_outliers.to_string(),
            fmt_f64(m.theta_max_dps),
            fmt_f64(m.c_deg),
            fmt_f64(m.slope_ms_per_deg),
            fmt_f64(m.intercept_ms),
            fmt_f64(r.rmse_velocity_dps),
            fmt_f64(r.rmse_duration_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `amplitude_deg,peak_velocity_dps,duration_ms` samples of a model curve.
pub fn write_curve<W: Write>(out: W, curve: &[(f64, f64, f64)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["amplitude_deg", "peak_velocity_dps", "duration_ms"])?;
    for &(a, v, d) in curve {
        w.write_record([fmt_f64(a), fmt_f64(v), fmt_f64(d)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum RecallLogError {
    #[error("recall log is missing column `{0}`")]
    MissingColumn(String),
    #[error("recall log line {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("unreadable recall log: {0}")]
    Csv(#[from] csv::Error),
}

pub const RECALL_COLUMNS: [&str; 4] = ["participant_id", "set", "presented", "recalled_in_order"];

/// Per-participant sets from `participant_id,set,presented,recalled_in_order`,
/// ordered by participant then set number.
pub fn parse_recall_log<R: Read>(input: R) -> Result<BTreeMap<String, Vec<SetRecall>>, RecallLogError> {
    let mut reader = csv::Reader::from_reader(input);
    let cols = Columns::new(reader.headers()?);
    if let Some(m) = cols.first_missing(&RECALL_COLUMNS) {
        return Err(RecallLogError::MissingColumn(m.into()));
    }
    let mut by: BTreeMap<String, BTreeMap<u32, SetRecall>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let int = |name: &str| -> Result<u32, RecallLogError> {
            let v = cols.get(&rec, name).trim();
            v.parse().map_err(|_| RecallLogError::BadRow { line, reason: format!("{name} is not a count: `{v}`") })
        };
        let id = cols.get(&rec, "participant_id").trim().to_string();
        let set = int("set")?;
        let s = SetRecall { presented: int("presented")?, recalled_in_order: int("recalled_in_order")? };
        if by.entry(id.clone()).or_default().insert(set, s).is_some() {
            return Err(RecallLogError::BadRow { line, reason: format!("set {set} of {id} listed twice") });
        }
    }
    Ok(by.into_iter().map(|(id, sets)| (id, sets.into_values().collect())).collect())
}

pub fn write_recall_log<W: Write>(out: W, logs: &BTreeMap<String, Vec<SetRecall>>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECALL_COLUMNS)?;
    for (id, sets) in logs {
        for (i, s) in sets.iter().enumerate() {
            w.write_record([id.clone(), (i + 1).to_string(), s.presented.to_string(), s.recalled_in_order.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `participant_id,age,gender,score,label`, scores rounded to two decimals.
pub fn write_rspan_scores<W: Write>(out: W, rows: &[(ParticipantMeta, RspanResult)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["participant_id", "age", "gender", "score", "label"])?;
    for (m, r) in rows {
        w.write_record([m.id.clone(), m.age.to_string(), m.gender.as_str().into(), format!("{:.2}", r.score), m.label.as_str().into()])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per tail of a two-group t-test.
pub fn write_ttest<W: Write>(out: W, group_a: &str, group_b: &str, variant: TVariant, t: &TTest) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group_a", "group_b", "variant", "tail", "t", "df", "p"])?;
    for (tail, name) in [(Tail::One, "one"), (Tail::Two, "two")] {
        w.write_record([
            group_a.to_string(),
            group_b.to_string(),
            match variant {
                TVariant::Pooled => "pooled",
                TVariant::Welch => "welch",
            }
            .to_string(),
            name.to_string(),
            fmt_f64(t.t),
            fmt_f64(t.df),
            fmt_f64(t.p(tail)),
        ])?;
    }
    w.flush()?;
    Ok(())
}
