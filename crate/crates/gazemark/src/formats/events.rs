//! Event export CSV.
//!
//! `x_deg,y_deg` hold the fixation centroid or the saccade landing point.
//! Saccade rows leave `dispersion_deg` and the pupil columns empty; fixation
//! rows leave `amplitude_deg` and `peak_velocity_dps` empty.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use gazemark_core::events::{Event, FixationEvent, SaccadeEvent};
use gazemark_core::features::{ParticipantEvents, StimulusEvents};
use gazemark_core::geometry::Point;
use gazemark_core::ingest::ParticipantMeta;
use thiserror::Error;

use super::{fmt_f64, fmt_opt, Columns};

pub const EVENT_COLUMNS: [&str; 13] = [
    "participant_id",
    "stimulus_id",
    "kind",
    "start_ms",
    "end_ms",
    "duration_ms",
    "x_deg",
    "y_deg",
    "amplitude_deg",
    "peak_velocity_dps",
    "dispersion_deg",
    "pupil_left_mm",
    "pupil_right_mm",
];

/// Events of one participant viewing one stimulus, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub participant_id: String,
    pub stimulus_id: String,
    pub events: Vec<Event>,
}

#[derive(Debug, Error)]
pub enum EventCsvError {
    #[error("events file is missing column `{0}`")]
    MissingColumn(String),
    #[error("events line {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("events reference participant {0}, absent from the metadata")]
    UnknownParticipant(String),
    #[error("unreadable events CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Writes event logs; `source`, when given, fills an extra trailing column.
pub fn write_events_csv<W: Write>(out: W, logs: &[EventLog], source: Option<&str>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = EVENT_COLUMNS.to_vec();
    if source.is_some() {
        header.push("source");
    }
    w.write_record(&header)?;
    for log in logs {
        for e in &log.events {
            let mut rec = vec![log.participant_id.clone(), log.stimulus_id.clone(), e.kind().as_str().to_string()];
            rec.extend([fmt_f64(e.start_ms()), fmt_f64(e.end_ms()), fmt_f64(e.duration_ms())]);
            match e {
                Event::Fixation(f) => rec.extend([
                    fmt_f64(f.centroid_deg.x),
                    fmt_f64(f.centroid_deg.y),
                    String::new(),
                    String::new(),
                    fmt_f64(f.dispersion_deg),
                    fmt_opt(f.mean_pupil_left_mm),
                    fmt_opt(f.mean_pupil_right_mm),
                ]),
                Event::Saccade(s) => rec.extend([
                    fmt_f64(s.end_deg.x),
                    fmt_f64(s.end_deg.y),
                    fmt_f64(s.amplitude_deg),
                    fmt_f64(s.peak_velocity_dps),
                    String::new(),
                    String::new(),
                    String::new(),
                ]),
            }
            if let Some(src) = source {
                rec.push(src.to_string());
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads an events file back into logs grouped by (participant, stimulus).
///
/// The saccade launch point is not exported, so parsed saccades carry the
/// landing point for both ends; amplitude and peak velocity are read
/// directly and the mean velocity is amplitude over duration.
pub fn parse_events_csv<R: Read>(input: R) -> Result<Vec<EventLog>, EventCsvError> {
    let mut reader = csv::Reader::from_reader(input);
    let cols = Columns::new(reader.headers()?);
    if let Some(m) = cols.first_missing(&EVENT_COLUMNS) {
        return Err(EventCsvError::MissingColumn(m.into()));
    }
    let mut groups: BTreeMap<(String, String), Vec<Event>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |reason: String| EventCsvError::BadRow { line, reason };
        let num = |name: &str| -> Result<f64, EventCsvError> {
            let v = cols.get(&rec, name).trim();
            v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(format!("{name} is not a number: `{v}`")))
        };
        let opt = |name: &str| -> Result<Option<f64>, EventCsvError> {
            if cols.get(&rec, name).trim().is_empty() {
                Ok(None)
            } else {
                num(name).map(Some)
            }
        };
        let (start_ms, end_ms) = (num("start_ms")?, num("end_ms")?);
        let at = Point::new(num("x_deg")?, num("y_deg")?);
        let event = match cols.get(&rec, "kind").trim() {
            "fixation" => Event::Fixation(FixationEvent {
                start_ms,
                end_ms,
                duration_ms: num("duration_ms")?,
                centroid_deg: at,
                dispersion_deg: num("dispersion_deg")?,
                mean_pupil_left_mm: opt("pupil_left_mm")?,
                mean_pupil_right_mm: opt("pupil_right_mm")?,
            }),
            "saccade" => {
                let duration_ms = num("duration_ms")?;
                let amplitude_deg = num("amplitude_deg")?;
                Event::Saccade(SaccadeEvent {
                    start_ms,
                    end_ms,
                    duration_ms,
                    start_deg: at,
                    end_deg: at,
                    amplitude_deg,
                    peak_velocity_dps: num("peak_velocity_dps")?,
                    mean_velocity_dps: if duration_ms > 0.0 { amplitude_deg / duration_ms * 1000.0 } else { 0.0 },
                })
            }
            other => return Err(bad(format!("unknown event kind `{other}`"))),
        };
        let key = (cols.get(&rec, "participant_id").trim().to_string(), cols.get(&rec, "stimulus_id").trim().to_string());
        groups.entry(key).or_default().push(event);
    }
    Ok(groups
        .into_iter()
        .map(|((participant_id, stimulus_id), events)| EventLog { participant_id, stimulus_id, events })
        .collect())
}

/// Attaches metadata to event logs. Participants without events get no
/// stimuli; events of unknown participants are an error.
pub fn join_events(meta: &[ParticipantMeta], logs: Vec<EventLog>) -> Result<Vec<ParticipantEvents>, EventCsvError> {
    let mut by_id: BTreeMap<&str, ParticipantEvents> =
        meta.iter().map(|m| (m.id.as_str(), ParticipantEvents { meta: m.clone(), stimuli: Vec::new() })).collect();
    for log in logs {
        let p = by_id.get_mut(log.participant_id.as_str()).ok_or_else(|| EventCsvError::UnknownParticipant(log.participant_id.clone()))?;
        p.stimuli.push(StimulusEvents { stimulus_id: log.stimulus_id, events: log.events });
    }
    Ok(by_id.into_values().collect())
}
