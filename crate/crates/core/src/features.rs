//! Feature tables built from detected events.
//!
//! Event feature sets summarise fixations and/or saccades per unit
//! (event, sentence, scene or participant). AOI feature sets summarise the
//! same events split by area of interest, per sentence or per scene.
//! Statistics use population standard deviations; inputs are sorted before
//! reduction so values do not depend on event order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::sqrt;
use thiserror::Error;

use crate::aoi::{map_events_to_aois, AoiError, AoiKind, AoiSet, MappedEvent, SaccadeAttribution};
use crate::events::{Event, FixationEvent, SaccadeEvent};
use crate::geometry::ScreenGeometry;
use crate::ingest::{Gender, Label, ParticipantMeta, UnknownCategory};
use crate::ml::{ColumnKind, Dataset, MlError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("no rows survived feature construction")]
    EmptyTable,
    #[error(transparent)]
    Aoi(#[from] AoiError),
    #[error("{0} granularity is not available for AOI feature sets")]
    Granularity(Granularity),
    #[error(transparent)]
    Ml(#[from] MlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Granularity {
    Event,
    Sentence,
    Scene,
    Participant,
}

impl Granularity {
    pub const ALL: [Granularity; 4] = [Granularity::Event, Granularity::Sentence, Granularity::Scene, Granularity::Participant];

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Event => "event",
            Granularity::Sentence => "sentence",
            Granularity::Scene => "scene",
            Granularity::Participant => "participant",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Granularity::ALL.into_iter().find(|g| g.as_str() == s).ok_or_else(|| UnknownCategory(s.into()))
    }
}

/// The five feature sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureSet {
    Fixation,
    Saccade,
    Combined,
    AoiScene,
    AoiSentence,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 5] = [FeatureSet::Fixation, FeatureSet::Saccade, FeatureSet::Combined, FeatureSet::AoiScene, FeatureSet::AoiSentence];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Fixation => "fixation",
            FeatureSet::Saccade => "saccade",
            FeatureSet::Combined => "combined",
            FeatureSet::AoiScene => "aoi-scene",
            FeatureSet::AoiSentence => "aoi-sentence",
        }
    }

    pub fn is_aoi(self) -> bool {
        matches!(self, FeatureSet::AoiScene | FeatureSet::AoiSentence)
    }

    /// The granularity an AOI set is tied to, or `requested` for event sets.
    pub fn effective_granularity(self, requested: Granularity) -> Granularity {
        match self {
            FeatureSet::AoiScene => Granularity::Scene,
            FeatureSet::AoiSentence => Granularity::Sentence,
            _ => requested,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureSet::ALL.into_iter().find(|g| g.as_str() == s).ok_or_else(|| UnknownCategory(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventMode {
    Fixation,
    Saccade,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AoiMode {
    SceneBased,
    SentenceBased,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureType {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureColumn {
    pub name: String,
    pub ty: FeatureType,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue {
    Numeric(f64),
    /// Level index into the column's nominal values.
    Nominal(usize),
}

impl FeatureValue {
    pub fn as_f64(self) -> f64 {
        match self {
            FeatureValue::Numeric(v) => v,
            FeatureValue::Nominal(l) => l as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub participant_id: String,
    pub instance_id: String,
    /// Aligned with the table schema.
    pub values: Vec<FeatureValue>,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub schema: Vec<FeatureColumn>,
    pub rows: Vec<FeatureVector>,
    pub granularity: Granularity,
}

/// A freshly built table plus the number of units dropped because they held
/// no events of the required kind.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltTable {
    pub table: FeatureTable,
    pub dropped_units: usize,
}

impl FeatureTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn value(&self, row: usize, name: &str) -> Option<FeatureValue> {
        self.column_index(name).map(|c| self.rows[row].values[c])
    }

    /// Row counts per class as (ADHD, NonADHD).
    pub fn class_counts(&self) -> (usize, usize) {
        let adhd = self.rows.iter().filter(|r| r.label == Label::Adhd).count();
        (adhd, self.rows.len() - adhd)
    }

    /// Checks every row against the schema.
    pub fn conforms(&self) -> bool {
        self.rows.iter().all(|r| {
            r.values.len() == self.schema.len()
                && r.values.iter().zip(&self.schema).all(|(v, c)| match (v, &c.ty) {
                    (FeatureValue::Numeric(x), FeatureType::Numeric) => x.is_finite(),
                    (FeatureValue::Nominal(l), FeatureType::Nominal(levels)) => *l < levels.len(),
                    _ => false,
                })
        })
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Option<FeatureTable> {
        let idx: Vec<usize> = names.iter().map(|n| self.column_index(n)).collect::<Option<_>>()?;
        Some(FeatureTable {
            schema: idx.iter().map(|&i| self.schema[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureVector { values: idx.iter().map(|&i| r.values[i]).collect(), ..r.clone() })
                .collect(),
            granularity: self.granularity,
        })
    }

    /// Design matrix with ADHD as the positive class.
    pub fn to_dataset(&self) -> Result<Dataset, MlError> {
        Dataset::new(
            self.schema.iter().map(|c| c.name.clone()).collect(),
            self.schema
                .iter()
                .map(|c| match &c.ty {
                    FeatureType::Numeric => ColumnKind::Numeric,
                    FeatureType::Nominal(l) => ColumnKind::Nominal { levels: l.len() },
                })
                .collect(),
            self.rows.iter().map(|r| r.values.iter().map(|v| v.as_f64()).collect()).collect(),
            self.rows.iter().map(|r| r.label.is_positive()).collect(),
        )
    }
}

/// Detected events of one stimulus presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusEvents {
    pub stimulus_id: String,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantEvents {
    pub meta: ParticipantMeta,
    pub stimuli: Vec<StimulusEvents>,
}

/// Count, sum, mean, population std, min and max of a sample. All zero when empty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub n: usize,
    pub sum: f64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Summary::default();
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let sum: f64 = v.iter().sum();
        let mean = sum / n as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        Summary { n, sum, mean, std: sqrt(var), min: v[0], max: v[n - 1] }
    }
}

const GENDER: &str = "gender";

fn gender_column() -> FeatureColumn {
    FeatureColumn {
        name: GENDER.into(),
        ty: FeatureType::Nominal(Gender::ALL.iter().map(|g| g.as_str().to_string()).collect()),
    }
}

fn gender_value(g: Gender) -> FeatureValue {
    FeatureValue::Nominal(Gender::ALL.iter().position(|x| *x == g).unwrap_or(0))
}

fn numeric(names: &[&str]) -> Vec<FeatureColumn> {
    names.iter().map(|n| FeatureColumn { name: (*n).into(), ty: FeatureType::Numeric }).collect()
}

const FIXATION_COLUMNS: [&str; 8] = [
    "fix_count",
    "fix_total_ms",
    "fix_mean_ms",
    "fix_std_ms",
    "pupil_left_mm",
    "pupil_right_mm",
    "pupil_left_imputed",
    "pupil_right_imputed",
];

const SACCADE_COLUMNS: [&str; 11] = [
    "sac_count",
    "sac_total_ms",
    "sac_mean_ms",
    "sac_std_ms",
    "amp_max_deg",
    "amp_min_deg",
    "amp_mean_deg",
    "amp_std_deg",
    "pv_max_dps",
    "pv_mean_dps",
    "pv_std_dps",
];

/// Set in combined mode when a unit has fixations but no saccades.
const SACCADE_IMPUTED: &str = "sac_imputed";

/// Column names of an event feature table, gender first.
pub fn event_schema(mode: EventMode) -> Vec<FeatureColumn> {
    let mut s = vec![gender_column()];
    match mode {
        EventMode::Fixation => s.extend(numeric(&FIXATION_COLUMNS)),
        EventMode::Saccade => s.extend(numeric(&SACCADE_COLUMNS)),
        EventMode::Combined => {
            s.extend(numeric(&FIXATION_COLUMNS));
            s.extend(numeric(&SACCADE_COLUMNS));
            s.extend(numeric(&[SACCADE_IMPUTED]));
        }
    }
    s
}

/// Mean left and right pupil over every fixation of a participant that
/// carries a value; used to fill units without pupil data.
fn participant_pupils(p: &ParticipantEvents) -> (f64, f64) {
    let fix = p.stimuli.iter().flat_map(|s| s.events.iter().filter_map(Event::as_fixation));
    let (mut l, mut r) = (Vec::new(), Vec::new());
    for f in fix {
        l.extend(f.mean_pupil_left_mm);
        r.extend(f.mean_pupil_right_mm);
    }
    (Summary::of(l).mean, Summary::of(r).mean)
}

fn pupil_pair(fix: &[&FixationEvent], fallback: (f64, f64)) -> [f64; 4] {
    let l = Summary::of(fix.iter().filter_map(|f| f.mean_pupil_left_mm));
    let r = Summary::of(fix.iter().filter_map(|f| f.mean_pupil_right_mm));
    let (lv, li) = if l.n > 0 { (l.mean, 0.0) } else { (fallback.0, 1.0) };
    let (rv, ri) = if r.n > 0 { (r.mean, 0.0) } else { (fallback.1, 1.0) };
    [lv, rv, li, ri]
}

fn fixation_values(fix: &[&FixationEvent], pupils: (f64, f64)) -> Vec<f64> {
    let d = Summary::of(fix.iter().map(|f| f.duration_ms));
    let p = pupil_pair(fix, pupils);
    vec![d.n as f64, d.sum, d.mean, d.std, p[0], p[1], p[2], p[3]]
}

fn saccade_values(sac: &[&SaccadeEvent]) -> Vec<f64> {
    let d = Summary::of(sac.iter().map(|s| s.duration_ms));
    let a = Summary::of(sac.iter().map(|s| s.amplitude_deg));
    let v = Summary::of(sac.iter().map(|s| s.peak_velocity_dps));
    vec![d.n as f64, d.sum, d.mean, d.std, a.max, a.min, a.mean, a.std, v.max, v.mean, v.std]
}

/// A group of events forming one table row before labelling.
struct Unit<'a> {
    instance_id: String,
    events: Vec<&'a Event>,
}

fn units<'a>(p: &'a ParticipantEvents, granularity: Granularity, mode: EventMode, aois: &AoiSet) -> Result<Vec<Unit<'a>>, FeatureError> {
    let mut out: Vec<Unit<'a>> = Vec::new();
    match granularity {
        Granularity::Event => {
            for s in &p.stimuli {
                let ev = &s.events;
                let mut k = 0;
                for (i, e) in ev.iter().enumerate() {
                    let members: Vec<&Event> = match (mode, e) {
                        (EventMode::Fixation, Event::Fixation(_)) | (EventMode::Saccade, Event::Saccade(_)) => vec![e],
                        // A fixation together with the saccade leaving it.
                        (EventMode::Combined, Event::Fixation(_)) => {
                            let mut m = vec![e];
                            if let Some(next @ Event::Saccade(_)) = ev.get(i + 1) {
                                m.push(next);
                            }
                            m
                        }
                        _ => continue,
                    };
                    out.push(Unit { instance_id: format!("{}.e{k:04}", s.stimulus_id), events: members });
                    k += 1;
                }
            }
        }
        Granularity::Sentence => {
            for s in &p.stimuli {
                out.push(Unit { instance_id: s.stimulus_id.clone(), events: s.events.iter().collect() });
            }
        }
        Granularity::Scene => {
            let mut by_scene: BTreeMap<String, Vec<&Event>> = BTreeMap::new();
            for s in &p.stimuli {
                let scene = aois.scene_of(&s.stimulus_id).ok_or_else(|| AoiError::UnknownStimulus(s.stimulus_id.clone()))?;
                by_scene.entry(scene.to_string()).or_default().extend(s.events.iter());
            }
            out.extend(by_scene.into_iter().map(|(instance_id, events)| Unit { instance_id, events }));
        }
        Granularity::Participant => {
            out.push(Unit { instance_id: p.meta.id.clone(), events: p.stimuli.iter().flat_map(|s| s.events.iter()).collect() });
        }
    }
    Ok(out)
}

fn finish(schema: Vec<FeatureColumn>, mut rows: Vec<FeatureVector>, granularity: Granularity, dropped_units: usize) -> Result<BuiltTable, FeatureError> {
    if rows.is_empty() {
        return Err(FeatureError::EmptyTable);
    }
    rows.sort_by(|a, b| (&a.participant_id, &a.instance_id).cmp(&(&b.participant_id, &b.instance_id)));
    Ok(BuiltTable { table: FeatureTable { schema, rows, granularity }, dropped_units })
}

/// One row per unit of `granularity`. Units without a fixation (fixation
/// and combined modes) or without a saccade (saccade mode) are dropped and
/// counted. In combined mode missing saccade statistics are zero and
/// flagged. `aois` supplies the scene of each stimulus.
pub fn build_event_features(
    participants: &[ParticipantEvents],
    mode: EventMode,
    granularity: Granularity,
    aois: &AoiSet,
) -> Result<BuiltTable, FeatureError> {
    let schema = event_schema(mode);
    let mut rows = Vec::new();
    let mut dropped = 0;
    for p in participants {
        let pupils = participant_pupils(p);
        for u in units(p, granularity, mode, aois)? {
            let fix: Vec<&FixationEvent> = u.events.iter().filter_map(|e| e.as_fixation()).collect();
            let sac: Vec<&SaccadeEvent> = u.events.iter().filter_map(|e| e.as_saccade()).collect();
            let required_missing = match mode {
                EventMode::Fixation | EventMode::Combined => fix.is_empty(),
                EventMode::Saccade => sac.is_empty(),
            };
            if required_missing {
                dropped += 1;
                continue;
            }
            let mut vals = Vec::new();
            match mode {
                EventMode::Fixation => vals.extend(fixation_values(&fix, pupils)),
                EventMode::Saccade => vals.extend(saccade_values(&sac)),
                EventMode::Combined => {
                    vals.extend(fixation_values(&fix, pupils));
                    vals.extend(saccade_values(&sac));
                    vals.push(if sac.is_empty() { 1.0 } else { 0.0 });
                }
            }
            let mut values = vec![gender_value(p.meta.gender)];
            values.extend(vals.into_iter().map(FeatureValue::Numeric));
            rows.push(FeatureVector { participant_id: p.meta.id.clone(), instance_id: u.instance_id, values, label: p.meta.label });
        }
    }
    finish(schema, rows, granularity, dropped)
}

const AOIS: [AoiKind; 3] = [AoiKind::Sentence, AoiKind::CriticalWord, AoiKind::DecisionLetter];

/// Column names of the AOI feature tables.
pub fn aoi_schema() -> Vec<FeatureColumn> {
    let mut names: Vec<String> = Vec::new();
    for k in 1..=3 {
        names.push(format!("aoi{k}_fix_count"));
    }
    for k in 1..=3 {
        names.push(format!("aoi{k}_fix_total_ms"));
    }
    names.push("aoi2_fix_mean_ms".into());
    names.push("aoi2_fix_std_ms".into());
    for k in 2..=3 {
        names.push(format!("aoi{k}_pupil_left_mm"));
        names.push(format!("aoi{k}_pupil_right_mm"));
    }
    for stat in ["max", "min"] {
        for k in 1..=3 {
            names.push(format!("aoi{k}_amp_{stat}_deg"));
        }
    }
    for stat in ["mean", "std"] {
        for k in 1..=3 {
            names.push(format!("aoi{k}_amp_{stat}_deg"));
        }
    }
    names.push("aoi2_fix_imputed".into());
    names.push("aoi3_fix_imputed".into());
    for k in 1..=3 {
        names.push(format!("aoi{k}_sac_imputed"));
    }
    let mut s = vec![gender_column()];
    s.extend(names.into_iter().map(|name| FeatureColumn { name, ty: FeatureType::Numeric }));
    s
}

/// AOI-mapped events of one stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusMapped {
    pub stimulus_id: String,
    pub events: Vec<MappedEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantMapped {
    pub meta: ParticipantMeta,
    pub stimuli: Vec<StimulusMapped>,
}

/// Maps every stimulus of a participant onto its AOIs.
pub fn map_participant(
    p: &ParticipantEvents,
    aois: &AoiSet,
    geometry: &ScreenGeometry,
    attribution: SaccadeAttribution,
) -> Result<ParticipantMapped, AoiError> {
    let stimuli = p
        .stimuli
        .iter()
        .map(|s| {
            Ok(StimulusMapped {
                stimulus_id: s.stimulus_id.clone(),
                events: map_events_to_aois(&s.events, aois, &s.stimulus_id, geometry, attribution)?,
            })
        })
        .collect::<Result<Vec<_>, AoiError>>()?;
    Ok(ParticipantMapped { meta: p.meta.clone(), stimuli })
}

fn aoi_values(events: &[&MappedEvent], pupils: (f64, f64)) -> Vec<f64> {
    let fix = |k: AoiKind| -> Vec<&FixationEvent> { events.iter().filter(|m| m.aoi == Some(k)).filter_map(|m| m.event.as_fixation()).collect() };
    let sac = |k: AoiKind| -> Vec<&SaccadeEvent> { events.iter().filter(|m| m.aoi == Some(k)).filter_map(|m| m.event.as_saccade()).collect() };
    let fixs: Vec<Vec<&FixationEvent>> = AOIS.iter().map(|&k| fix(k)).collect();
    let sacs: Vec<Summary> = AOIS.iter().map(|&k| Summary::of(sac(k).iter().map(|s| s.amplitude_deg))).collect();
    let durs: Vec<Summary> = fixs.iter().map(|f| Summary::of(f.iter().map(|x| x.duration_ms))).collect();
    let mut v = Vec::new();
    v.extend(durs.iter().map(|d| d.n as f64));
    v.extend(durs.iter().map(|d| d.sum));
    v.push(durs[1].mean);
    v.push(durs[1].std);
    for k in 1..=2 {
        let p = pupil_pair(&fixs[k], pupils);
        v.push(p[0]);
        v.push(p[1]);
    }
    v.extend(sacs.iter().map(|s| s.max));
    v.extend(sacs.iter().map(|s| s.min));
    v.extend(sacs.iter().map(|s| s.mean));
    v.extend(sacs.iter().map(|s| s.std));
    v.push(if fixs[1].is_empty() { 1.0 } else { 0.0 });
    v.push(if fixs[2].is_empty() { 1.0 } else { 0.0 });
    v.extend(sacs.iter().map(|s| if s.n == 0 { 1.0 } else { 0.0 }));
    v
}

/// One row per sentence or per scene. Units where no event lands in any AOI
/// are dropped and counted.
pub fn build_aoi_features(participants: &[ParticipantMapped], aois: &AoiSet, mode: AoiMode) -> Result<BuiltTable, FeatureError> {
    let schema = aoi_schema();
    let mut rows = Vec::new();
    let mut dropped = 0;
    for p in participants {
        let fixations = p.stimuli.iter().flat_map(|s| s.events.iter().filter_map(|m| m.event.as_fixation()));
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for f in fixations {
            l.extend(f.mean_pupil_left_mm);
            r.extend(f.mean_pupil_right_mm);
        }
        let pupils = (Summary::of(l).mean, Summary::of(r).mean);
        let mut groups: BTreeMap<String, Vec<&MappedEvent>> = BTreeMap::new();
        for s in &p.stimuli {
            let key = match mode {
                AoiMode::SentenceBased => s.stimulus_id.clone(),
                AoiMode::SceneBased => aois.scene_of(&s.stimulus_id).ok_or_else(|| AoiError::UnknownStimulus(s.stimulus_id.clone()))?.to_string(),
            };
            groups.entry(key).or_default().extend(s.events.iter());
        }
        for (instance_id, events) in groups {
            if events.iter().all(|m| m.aoi.is_none()) {
                dropped += 1;
                continue;
            }
            let mut values = vec![gender_value(p.meta.gender)];
            values.extend(aoi_values(&events, pupils).into_iter().map(FeatureValue::Numeric));
            rows.push(FeatureVector { participant_id: p.meta.id.clone(), instance_id, values, label: p.meta.label });
        }
    }
    let g = match mode {
        AoiMode::SceneBased => Granularity::Scene,
        AoiMode::SentenceBased => Granularity::Sentence,
    };
    finish(schema, rows, g, dropped)
}

/// Builds any of the five feature sets. `granularity` applies to the event
/// sets only.
pub fn build_feature_set(
    set: FeatureSet,
    participants: &[ParticipantEvents],
    granularity: Granularity,
    aois: &AoiSet,
    geometry: &ScreenGeometry,
) -> Result<BuiltTable, FeatureError> {
    let mode = match set {
        FeatureSet::Fixation => EventMode::Fixation,
        FeatureSet::Saccade => EventMode::Saccade,
        FeatureSet::Combined => EventMode::Combined,
        FeatureSet::AoiScene | FeatureSet::AoiSentence => {
            let mapped = participants
                .iter()
                .map(|p| map_participant(p, aois, geometry, SaccadeAttribution::Landing))
                .collect::<Result<Vec<_>, _>>()?;
            let m = if set == FeatureSet::AoiScene { AoiMode::SceneBased } else { AoiMode::SentenceBased };
            return build_aoi_features(&mapped, aois, m);
        }
    };
    build_event_features(participants, mode, granularity, aois)
}
