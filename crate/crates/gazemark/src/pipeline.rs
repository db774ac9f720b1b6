//! Pipeline stages over in-memory data. Parallel work goes through rayon;
//! every unit derives its randomness from the master seed and results are
//! collected in input order, so output never depends on scheduling.

use gazemark_core::aoi::AoiSet;
use gazemark_core::events::{detect_events, EventError};
use gazemark_core::features::{build_feature_set, BuiltTable, FeatureError, FeatureSet, Granularity, ParticipantEvents};
use gazemark_core::ingest::{validate_and_interpolate, GazeRecording, Label, ParticipantMeta};
use gazemark_core::mainseq::{deviation_report, DeviationReport, MainSeqError};
use gazemark_core::ml::{
    assemble_report, grid_points, run_fold, select_best, stratified_folds, ClassifierSpec, Dataset, EvalReport, Family, Grid, MlError,
};
use gazemark_core::stats::{independent_t_test, rspan_score, RspanResult, SetRecall, StatsError, TTest, TVariant};
use gazemark_core::synth::{cohort_meta, generate_session, session_seed, Cohort, CohortSpec, SynthError, TruthRecording};
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::config::Settings;
use crate::formats::events::EventLog;

/// Generates a cohort with sessions in parallel; identical to the
/// sequential generator for the same spec.
pub fn synthesize(spec: &CohortSpec, aois: &AoiSet) -> Result<Cohort, SynthError> {
    spec.validate()?;
    let meta = cohort_meta(spec);
    let stimuli: Vec<String> = aois.stimulus_ids().map(String::from).collect();
    let sessions = meta
        .par_iter()
        .enumerate()
        .map(|(i, m)| generate_session(m, &stimuli, aois, spec, session_seed(spec, i)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut recordings = Vec::new();
    let mut truth = Vec::new();
    for s in sessions {
        recordings.extend(s.recordings);
        truth.extend(s.truth);
    }
    Ok(Cohort { meta, recordings, truth })
}

pub fn truth_logs(truth: &[TruthRecording]) -> Vec<EventLog> {
    truth
        .iter()
        .map(|t| EventLog { participant_id: t.participant_id.clone(), stimulus_id: t.stimulus_id.clone(), events: t.events.clone() })
        .collect()
}

/// Repairs dropouts in every recording.
pub fn clean(recordings: &[GazeRecording], max_gap_ms: f64) -> Vec<GazeRecording> {
    recordings.par_iter().map(|r| validate_and_interpolate(r, max_gap_ms)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub logs: Vec<EventLog>,
    /// Recordings with too few valid samples to detect anything.
    pub skipped: Vec<(String, String)>,
}

/// Interpolates, converts to degrees and runs the detector per recording.
pub fn detect(recordings: &[GazeRecording], s: &Settings) -> Result<Detection, EventError> {
    let results = recordings
        .par_iter()
        .map(|r| {
            let deg = validate_and_interpolate(r, s.max_gap_ms).to_degrees(&s.geometry);
            match detect_events(&deg, &s.detector) {
                Ok(events) => Ok(Some(EventLog { participant_id: r.participant_id.clone(), stimulus_id: r.stimulus_id.clone(), events })),
                Err(EventError::TooFewSamples(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Detection { logs: Vec::new(), skipped: Vec::new() };
    for (r, log) in recordings.iter().zip(results) {
        match log {
            Some(l) => out.logs.push(l),
            None => out.skipped.push((r.participant_id.clone(), r.stimulus_id.clone())),
        }
    }
    Ok(out)
}

/// Main-sequence comparison of every detected saccade, grouped by label.
pub fn main_sequence(participants: &[ParticipantEvents]) -> Result<Vec<DeviationReport>, MainSeqError> {
    let mut sac = Vec::new();
    let mut labels = Vec::new();
    for p in participants {
        for s in &p.stimuli {
            for e in s.events.iter().filter_map(|e| e.as_saccade()) {
                sac.push(*e);
                labels.push(p.meta.label);
            }
        }
    }
    deviation_report(&sac, &labels)
}

pub fn features(
    set: FeatureSet,
    participants: &[ParticipantEvents],
    granularity: Granularity,
    aois: &AoiSet,
    s: &Settings,
) -> Result<BuiltTable, FeatureError> {
    build_feature_set(set, participants, granularity, aois, &s.geometry)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    pub family: Family,
    /// The evaluated setting (the grid winner under grid search).
    pub spec: ClassifierSpec,
    pub report: EvalReport,
    pub n_evaluations: usize,
}

/// Cross-validates each family on `data`, with or without grid search.
/// Folds of every (family, grid point) run in parallel.
pub fn classify(data: &Dataset, families: &[Family], grid_search: bool, grids: &BTreeMap<Family, Grid>, k: usize, seed: u64) -> Result<Vec<FamilyResult>, MlError> {
    let folds = stratified_folds(&data.labels, k, seed)?;
    let mut points: Vec<(usize, ClassifierSpec)> = Vec::new();
    for (fi, &f) in families.iter().enumerate() {
        let specs = match grids.get(&f).filter(|_| grid_search) {
            Some(g) => grid_points(f, g, seed)?,
            None => vec![ClassifierSpec::new(f, seed)],
        };
        for sp in specs {
            sp.validate()?;
            points.push((fi, sp));
        }
    }
    let units: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..k).map(move |f| (p, f))).collect();
    let outcomes = units
        .par_iter()
        .map(|&(p, f)| run_fold(&points[p].1, data, &folds, f, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut per_family: Vec<Vec<(ClassifierSpec, EvalReport)>> = vec![Vec::new(); families.len()];
    for (p, chunk) in outcomes.chunks(k).enumerate() {
        let report = assemble_report(data, k, chunk)?;
        per_family[points[p].0].push((points[p].1.clone(), report));
    }
    families
        .iter()
        .zip(per_family)
        .map(|(&family, evaluated)| {
            let best = select_best(evaluated)?;
            Ok(FamilyResult { family, spec: best.best, report: best.report, n_evaluations: best.n_evaluations })
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum RspanError {
    #[error("participant {0}: {1}")]
    Score(String, StatsError),
    #[error("recall log has no entry for participant {0}")]
    MissingLog(String),
    #[error("recall log lists {0}, absent from the metadata")]
    UnknownParticipant(String),
    #[error("t-test: {0}")]
    Test(StatsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RspanSummary {
    pub scores: Vec<(ParticipantMeta, RspanResult)>,
    /// NonADHD against ADHD, pooled variance.
    pub test: TTest,
}

/// Scores every participant and tests NonADHD against ADHD.
pub fn rspan(meta: &[ParticipantMeta], logs: &BTreeMap<String, Vec<SetRecall>>) -> Result<RspanSummary, RspanError> {
    if let Some(id) = logs.keys().find(|id| !meta.iter().any(|m| &m.id == *id)) {
        return Err(RspanError::UnknownParticipant(id.clone()));
    }
    let mut scores = Vec::with_capacity(meta.len());
    for m in meta {
        let log = logs.get(&m.id).ok_or_else(|| RspanError::MissingLog(m.id.clone()))?;
        let r = rspan_score(&m.id, log).map_err(|e| RspanError::Score(m.id.clone(), e))?;
        scores.push((m.clone(), r));
    }
    let group = |l: Label| scores.iter().filter(|(m, _)| m.label == l).map(|(_, r)| r.score).collect::<Vec<f64>>();
    let test = independent_t_test(&group(Label::NonAdhd), &group(Label::Adhd), TVariant::Pooled).map_err(RspanError::Test)?;
    Ok(RspanSummary { scores, test })
}
