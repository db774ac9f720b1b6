//! Gaze sample CSV.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use gazemark_core::geometry::ScreenGeometry;
use gazemark_core::ingest::{GazeRecording, GazeSample, RecordingError};
use thiserror::Error;

use super::{fmt_f64, fmt_opt, Columns};

pub const GAZE_COLUMNS: [&str; 9] =
    ["participant_id", "stimulus_id", "t_ms", "x_px", "y_px", "pupil_left_mm", "pupil_right_mm", "valid_left", "valid_right"];

/// Optional trailing column written by `ingest` for repaired samples.
pub const INTERPOLATED_COLUMN: &str = "interpolated";

#[derive(Debug, Error)]
pub enum GazeCsvError {
    #[error("gaze input holds no data rows")]
    EmptyInput,
    #[error("gaze input is missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: time {t_ms} ms does not advance within {participant}/{stimulus}")]
    NonMonotoneTime { participant: String, stimulus: String, line: u64, t_ms: f64 },
    #[error(transparent)]
    Recording(#[from] RecordingError),
    #[error("unreadable gaze CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// A data row that failed validation and was left out.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GazeParse {
    /// One recording per (participant, stimulus), ordered by that pair.
    pub recordings: Vec<GazeRecording>,
    /// Data rows in the file.
    pub rows: usize,
    pub rejected: Vec<RejectedRow>,
}

impl GazeParse {
    pub fn accepted(&self) -> usize {
        self.rows - self.rejected.len()
    }
}

fn parse_bool(s: &str, name: &str) -> Result<bool, String> {
    match s.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("{name} must be 0 or 1, got `{other}`")),
    }
}

fn parse_num(s: &str, name: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{name} is not a number: `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name} is not finite"))
    }
}

fn parse_pupil(s: &str, name: &str) -> Result<Option<f64>, String> {
    if s.trim().is_empty() {
        return Ok(None);
    }
    let v = parse_num(s, name)?;
    if v > 0.0 && v < 12.0 {
        Ok(Some(v))
    } else {
        Err(format!("{name} {v} mm outside (0, 12)"))
    }
}

struct Row {
    participant: String,
    stimulus: String,
    sample: GazeSample,
}

fn parse_row(rec: &csv::StringRecord, cols: &Columns, n_fields: usize, geometry: &ScreenGeometry) -> Result<Row, String> {
    if rec.len() != n_fields {
        return Err(format!("expected {n_fields} fields, found {}", rec.len()));
    }
    let field = |name: &str| cols.get(rec, name);
    let required = |name: &str| -> Result<&str, String> {
        let v = field(name);
        if v.trim().is_empty() {
            Err(format!("{name} is empty"))
        } else {
            Ok(v)
        }
    };
    let participant = required("participant_id")?.trim().to_string();
    let stimulus = required("stimulus_id")?.trim().to_string();
    let t_ms = parse_num(required("t_ms")?, "t_ms")?;
    let x_px = parse_num(required("x_px")?, "x_px")?;
    let y_px = parse_num(required("y_px")?, "y_px")?;
    let valid_left = parse_bool(required("valid_left")?, "valid_left")?;
    let valid_right = parse_bool(required("valid_right")?, "valid_right")?;
    let interpolated = match cols.index(INTERPOLATED_COLUMN) {
        Some(_) => parse_bool(required(INTERPOLATED_COLUMN)?, INTERPOLATED_COLUMN)?,
        None => false,
    };
    let sample = GazeSample {
        t_ms,
        x_px,
        y_px,
        pupil_left_mm: parse_pupil(field("pupil_left_mm"), "pupil_left_mm")?,
        pupil_right_mm: parse_pupil(field("pupil_right_mm"), "pupil_right_mm")?,
        valid_left,
        valid_right,
        interpolated,
    };
    if sample.is_valid() && !(x_px >= 0.0 && x_px <= geometry.width_px as f64 && y_px >= 0.0 && y_px <= geometry.height_px as f64) {
        return Err(format!("valid sample at ({x_px}, {y_px}) px lies off screen"));
    }
    Ok(Row { participant, stimulus, sample })
}

/// Parses a gaze log into recordings.
///
/// Rows with malformed or out-of-range values are counted in
/// [`GazeParse::rejected`] rather than dropped silently. Time must advance
/// within each (participant, stimulus) group in file order; groups may be
/// interleaved. Every recording is checked against `nominal_rate_hz`.
pub fn parse_gaze_csv<R: Read>(input: R, geometry: &ScreenGeometry, nominal_rate_hz: f64) -> Result<GazeParse, GazeCsvError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = match reader.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].trim().is_empty()) => h.clone(),
        Ok(_) => return Err(GazeCsvError::EmptyInput),
        Err(e) => return Err(e.into()),
    };
    let cols = Columns::new(&headers);
    if let Some(missing) = cols.first_missing(&GAZE_COLUMNS) {
        return Err(GazeCsvError::MissingColumn(missing.to_string()));
    }
    let mut groups: BTreeMap<(String, String), Vec<GazeSample>> = BTreeMap::new();
    let mut rows = 0;
    let mut rejected = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        rows += 1;
        let line = rec.position().map_or(0, |p| p.line());
        match parse_row(&rec, &cols, headers.len(), geometry) {
            Ok(r) => {
                let samples = groups.entry((r.participant, r.stimulus)).or_default();
                if let Some(last) = samples.last() {
                    if !(r.sample.t_ms > last.t_ms) {
                        let (participant, stimulus) = (cols.get(&rec, "participant_id").trim(), cols.get(&rec, "stimulus_id").trim());
                        return Err(GazeCsvError::NonMonotoneTime {
                            participant: participant.into(),
                            stimulus: stimulus.into(),
                            line,
                            t_ms: r.sample.t_ms,
                        });
                    }
                }
                samples.push(r.sample);
            }
            Err(reason) => rejected.push(RejectedRow { line, reason }),
        }
    }
    if rows == 0 {
        return Err(GazeCsvError::EmptyInput);
    }
    let recordings: Vec<GazeRecording> = groups
        .into_iter()
        .map(|((participant_id, stimulus_id), samples)| GazeRecording { participant_id, stimulus_id, samples, nominal_rate_hz })
        .collect();
    for r in &recordings {
        r.validate()?;
    }
    Ok(GazeParse { recordings, rows, rejected })
}

/// Writes recordings in the gaze schema, optionally with the
/// `interpolated` flag column.
pub fn write_gaze_csv<W: Write>(out: W, recordings: &[GazeRecording], with_interpolated: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = GAZE_COLUMNS.to_vec();
    if with_interpolated {
        header.push(INTERPOLATED_COLUMN);
    }
    w.write_record(&header)?;
    let flag = |b: bool| if b { "1" } else { "0" }.to_string();
    for r in recordings {
        for s in &r.samples {
            let mut rec = vec![
                r.participant_id.clone(),
                r.stimulus_id.clone(),
                fmt_f64(s.t_ms),
                fmt_f64(s.x_px),
                fmt_f64(s.y_px),
                fmt_opt(s.pupil_left_mm),
                fmt_opt(s.pupil_right_mm),
                flag(s.valid_left),
                flag(s.valid_right),
            ];
            if with_interpolated {
                rec.push(flag(s.interpolated));
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
