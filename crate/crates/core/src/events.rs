//! Velocity-threshold (I-VT) fixation and saccade detection.
//!
//! The detector works on recordings in degrees of visual angle. Speed is a
//! three-point central difference; samples at or above the threshold are
//! saccade candidates, everything else fixation candidates. Short saccade
//! runs fall back to fixation, short fixation runs wedged between saccades
//! are absorbed by them, and a post-filter merges fixations split by noise.

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::Point;
use crate::ingest::{DegreeRecording, DegreeSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EventError {
    #[error("need at least 3 valid samples, found {0}")]
    TooFewSamples(usize),
    #[error("invalid detector parameter: {0}")]
    BadParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocitySample {
    /// Index of the sample in the recording.
    pub index: usize,
    pub t_ms: f64,
    pub speed_dps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixationEvent {
    pub start_ms: f64,
    pub end_ms: f64,
    pub duration_ms: f64,
    pub centroid_deg: Point,
    /// RMS distance of the member samples to the centroid.
    pub dispersion_deg: f64,
    pub mean_pupil_left_mm: Option<f64>,
    pub mean_pupil_right_mm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaccadeEvent {
    pub start_ms: f64,
    pub end_ms: f64,
    pub duration_ms: f64,
    pub start_deg: Point,
    pub end_deg: Point,
    pub amplitude_deg: f64,
    pub peak_velocity_dps: f64,
    pub mean_velocity_dps: f64,
}

impl SaccadeEvent {
    /// Builds a saccade from its boundary positions; amplitude is their
    /// planar distance.
    pub fn from_endpoints(
        start_ms: f64,
        end_ms: f64,
        start_deg: Point,
        end_deg: Point,
        peak_velocity_dps: f64,
        mean_velocity_dps: f64,
    ) -> Self {
        Self {
            start_ms,
            end_ms,
            duration_ms: end_ms - start_ms,
            start_deg,
            end_deg,
            amplitude_deg: start_deg.distance(&end_deg),
            peak_velocity_dps,
            mean_velocity_dps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Fixation,
    Saccade,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Fixation => "fixation",
            EventKind::Saccade => "saccade",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Fixation(FixationEvent),
    Saccade(SaccadeEvent),
}

impl Event {
    pub fn kind(&self) -> EventKind {
        match self {
            Event::Fixation(_) => EventKind::Fixation,
            Event::Saccade(_) => EventKind::Saccade,
        }
    }

    pub fn start_ms(&self) -> f64 {
        match self {
            Event::Fixation(f) => f.start_ms,
            Event::Saccade(s) => s.start_ms,
        }
    }

    pub fn end_ms(&self) -> f64 {
        match self {
            Event::Fixation(f) => f.end_ms,
            Event::Saccade(s) => s.end_ms,
        }
    }

    pub fn duration_ms(&self) -> f64 {
        match self {
            Event::Fixation(f) => f.duration_ms,
            Event::Saccade(s) => s.duration_ms,
        }
    }

    pub fn as_fixation(&self) -> Option<&FixationEvent> {
        match self {
            Event::Fixation(f) => Some(f),
            Event::Saccade(_) => None,
        }
    }

    pub fn as_saccade(&self) -> Option<&SaccadeEvent> {
        match self {
            Event::Saccade(s) => Some(s),
            Event::Fixation(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvtParams {
    pub velocity_threshold_dps: f64,
    pub min_fixation_ms: f64,
    pub min_saccade_samples: usize,
}

impl Default for IvtParams {
    fn default() -> Self {
        Self { velocity_threshold_dps: 30.0, min_fixation_ms: 60.0, min_saccade_samples: 2 }
    }
}

impl IvtParams {
    pub fn validate(&self) -> Result<(), EventError> {
        if !(self.velocity_threshold_dps > 0.0 && self.velocity_threshold_dps.is_finite()) {
            return Err(EventError::BadParameter("velocity_threshold_dps must be positive"));
        }
        if !(self.min_fixation_ms >= 0.0) {
            return Err(EventError::BadParameter("min_fixation_ms must be non-negative"));
        }
        if self.min_saccade_samples < 2 {
            return Err(EventError::BadParameter("min_saccade_samples must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeParams {
    pub merge_angle_deg: f64,
    pub merge_gap_ms: f64,
    /// Fixations shorter than this after merging are discarded.
    pub min_fixation_ms: f64,
}

impl Default for MergeParams {
    fn default() -> Self {
        Self { merge_angle_deg: 0.5, merge_gap_ms: 75.0, min_fixation_ms: 60.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DetectorParams {
    pub ivt: IvtParams,
    pub merge: MergeParams,
}

impl DetectorParams {
    pub fn with_threshold(mut self, dps: f64) -> Self {
        self.ivt.velocity_threshold_dps = dps;
        self
    }
}

/// Contiguous runs of valid samples, as index ranges.
fn valid_segments(samples: &[DegreeSample]) -> Vec<core::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        if !samples[i].valid {
            i += 1;
            continue;
        }
        let start = i;
        while i < samples.len() && samples[i].valid {
            i += 1;
        }
        out.push(start..i);
    }
    out
}

fn speed(a: &DegreeSample, b: &DegreeSample) -> f64 {
    a.pos.distance(&b.pos) / (b.t_ms - a.t_ms) * 1000.0
}

/// Angular speed per valid sample. Interior samples of each valid run use a
/// central difference, run endpoints a one-sided one. Runs of a single valid
/// sample produce nothing.
pub fn compute_velocity_series(r: &DegreeRecording) -> Result<Vec<VelocitySample>, EventError> {
    let n_valid = r.samples.iter().filter(|s| s.valid).count();
    if n_valid < 3 {
        return Err(EventError::TooFewSamples(n_valid));
    }
    let s = &r.samples;
    let mut out = Vec::with_capacity(n_valid);
    for seg in valid_segments(s) {
        if seg.len() < 2 {
            continue;
        }
        for i in seg.clone() {
            let v = if i == seg.start {
                speed(&s[i], &s[i + 1])
            } else if i + 1 == seg.end {
                speed(&s[i - 1], &s[i])
            } else {
                speed(&s[i - 1], &s[i + 1])
            };
            out.push(VelocitySample { index: i, t_ms: s[i].t_ms, speed_dps: v });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Run {
    saccade: bool,
    // positions into the velocity series
    lo: usize,
    hi: usize,
}

/// Velocity-threshold detection without the fixation merge post-filter.
pub fn detect_events_ivt(r: &DegreeRecording, params: &IvtParams) -> Result<Vec<Event>, EventError> {
    params.validate()?;
    if r.samples.iter().all(|s| !s.valid) {
        return Ok(Vec::new());
    }
    let vel = compute_velocity_series(r)?;
    let mut events = Vec::new();

    // Split the velocity series where sample indices are not consecutive.
    let mut seg_start = 0;
    for k in 1..=vel.len() {
        if k == vel.len() || vel[k].index != vel[k - 1].index + 1 {
            detect_segment(r, &vel[seg_start..k], params, &mut events);
            seg_start = k;
        }
    }
    Ok(events)
}

fn runs_of(labels: &[bool]) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.saccade == l => run.hi = i,
            _ => runs.push(Run { saccade: l, lo: i, hi: i }),
        }
    }
    runs
}

fn detect_segment(r: &DegreeRecording, vel: &[VelocitySample], p: &IvtParams, out: &mut Vec<Event>) {
    if vel.is_empty() {
        return;
    }
    let t = |k: usize| vel[k].t_ms;
    let mut labels: Vec<bool> = vel.iter().map(|v| v.speed_dps >= p.velocity_threshold_dps).collect();

    // Too-short saccade candidates become fixation samples.
    for run in runs_of(&labels) {
        if run.saccade && run.hi - run.lo + 1 < p.min_saccade_samples {
            labels[run.lo..=run.hi].iter_mut().for_each(|l| *l = false);
        }
    }
    // Too-short fixation candidates between two saccades join them.
    let runs = runs_of(&labels);
    for (j, run) in runs.iter().enumerate() {
        let interior = j > 0 && j + 1 < runs.len();
        if !run.saccade && interior && t(run.hi) - t(run.lo) < p.min_fixation_ms {
            labels[run.lo..=run.hi].iter_mut().for_each(|l| *l = true);
        }
    }

    for run in runs_of(&labels) {
        if run.saccade {
            if let Some(s) = saccade_from(r, &vel[run.lo..=run.hi]) {
                out.push(Event::Saccade(s));
            }
        } else if t(run.hi) - t(run.lo) >= p.min_fixation_ms && run.hi > run.lo {
            out.push(Event::Fixation(fixation_from(r, &vel[run.lo..=run.hi])));
        }
    }
}

fn saccade_from(r: &DegreeRecording, vel: &[VelocitySample]) -> Option<SaccadeEvent> {
    let first = &r.samples[vel[0].index];
    let last = &r.samples[vel[vel.len() - 1].index];
    let peak = vel.iter().map(|v| v.speed_dps).fold(0.0, f64::max);
    let mean = vel.iter().map(|v| v.speed_dps).sum::<f64>() / vel.len() as f64;
    let s = SaccadeEvent::from_endpoints(first.t_ms, last.t_ms, first.pos, last.pos, peak, mean);
    (s.amplitude_deg > 0.0 && s.duration_ms > 0.0).then_some(s)
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn fixation_from(r: &DegreeRecording, vel: &[VelocitySample]) -> FixationEvent {
    let members: Vec<&DegreeSample> = vel.iter().map(|v| &r.samples[v.index]).collect();
    let n = members.len() as f64;
    let cx = members.iter().map(|s| s.pos.x).sum::<f64>() / n;
    let cy = members.iter().map(|s| s.pos.y).sum::<f64>() / n;
    let centroid = Point::new(cx, cy);
    let ms = members.iter().map(|s| {
        let d = s.pos.distance(&centroid);
        d * d
    });
    let dispersion = libm::sqrt(ms.sum::<f64>() / n);
    let raw = || members.iter().filter(|s| !s.interpolated);
    let start = members[0].t_ms;
    let end = members[members.len() - 1].t_ms;
    FixationEvent {
        start_ms: start,
        end_ms: end,
        duration_ms: end - start,
        centroid_deg: centroid,
        dispersion_deg: dispersion,
        mean_pupil_left_mm: mean_opt(raw().map(|s| s.pupil_left_mm)),
        mean_pupil_right_mm: mean_opt(raw().map(|s| s.pupil_right_mm)),
    }
}

fn weighted_opt(a: Option<f64>, wa: f64, b: Option<f64>, wb: f64) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => Some((a * wa + b * wb) / (wa + wb)),
        (Some(a), None) => Some(a),
        (None, b) => b,
    }
}

/// Duration-weighted union of two fixations; `b` follows `a` in time.
fn merge_fixations(a: &FixationEvent, b: &FixationEvent) -> FixationEvent {
    let (wa, wb) = (a.duration_ms, b.duration_ms);
    // zero-duration inputs would make the weights degenerate
    let (wa, wb) = if wa + wb > 0.0 { (wa, wb) } else { (1.0, 1.0) };
    let w = wa + wb;
    let c = Point::new(
        (a.centroid_deg.x * wa + b.centroid_deg.x * wb) / w,
        (a.centroid_deg.y * wa + b.centroid_deg.y * wb) / w,
    );
    let da = a.centroid_deg.distance(&c);
    let db = b.centroid_deg.distance(&c);
    let var = (wa * (a.dispersion_deg * a.dispersion_deg + da * da)
        + wb * (b.dispersion_deg * b.dispersion_deg + db * db))
        / w;
    FixationEvent {
        start_ms: a.start_ms,
        end_ms: b.end_ms,
        duration_ms: b.end_ms - a.start_ms,
        centroid_deg: c,
        dispersion_deg: libm::sqrt(var),
        mean_pupil_left_mm: weighted_opt(a.mean_pupil_left_mm, wa, b.mean_pupil_left_mm, wb),
        mean_pupil_right_mm: weighted_opt(a.mean_pupil_right_mm, wa, b.mean_pupil_right_mm, wb),
    }
}

fn merge_saccades(a: &SaccadeEvent, b: &SaccadeEvent) -> SaccadeEvent {
    let (wa, wb) = (a.duration_ms, b.duration_ms);
    let mean = if wa + wb > 0.0 {
        (a.mean_velocity_dps * wa + b.mean_velocity_dps * wb) / (wa + wb)
    } else {
        0.5 * (a.mean_velocity_dps + b.mean_velocity_dps)
    };
    let peak = a.peak_velocity_dps.max(b.peak_velocity_dps);
    SaccadeEvent::from_endpoints(a.start_ms, b.end_ms, a.start_deg, b.end_deg, peak, mean.min(peak))
}

/// Merges neighbouring fixations that are close in space and time, drops
/// fixations that remain too short, and re-joins the saccades around them.
///
/// Fixations are merged left to right: a fixation joins the previous one
/// when the time between them is below `merge_gap_ms` and their centroids
/// are closer than `merge_angle_deg`; any saccade in between is removed.
pub fn merge_and_filter_events(events: &[Event], p: &MergeParams) -> Vec<Event> {
    let mut merged: Vec<Event> = Vec::with_capacity(events.len());
    for ev in events {
        if let Event::Fixation(f) = ev {
            let prev = merged.iter().rposition(|e| e.kind() == EventKind::Fixation);
            if let Some(pi) = prev {
                let pf = *merged[pi].as_fixation().unwrap();
                let close = pf.centroid_deg.distance(&f.centroid_deg) < p.merge_angle_deg;
                if close && f.start_ms - pf.end_ms < p.merge_gap_ms {
                    merged.truncate(pi);
                    merged.push(Event::Fixation(merge_fixations(&pf, f)));
                    continue;
                }
            }
        }
        merged.push(*ev);
    }

    let mut out: Vec<Event> = Vec::with_capacity(merged.len());
    for ev in merged {
        match ev {
            Event::Fixation(f) if f.duration_ms < p.min_fixation_ms => {}
            Event::Saccade(s) => match out.last() {
                Some(Event::Saccade(prev)) if s.start_ms - prev.end_ms <= p.merge_gap_ms => {
                    let joined = merge_saccades(prev, &s);
                    out.pop();
                    if joined.amplitude_deg > 0.0 {
                        out.push(Event::Saccade(joined));
                    }
                }
                _ => out.push(ev),
            },
            _ => out.push(ev),
        }
    }
    out
}

/// Full detector: I-VT followed by the merge post-filter.
pub fn detect_events(r: &DegreeRecording, params: &DetectorParams) -> Result<Vec<Event>, EventError> {
    let raw = detect_events_ivt(r, &params.ivt)?;
    Ok(merge_and_filter_events(&raw, &params.merge))
}

/// A labelled time interval, used to compare detections with ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub kind: EventKind,
    pub start_ms: f64,
    pub end_ms: f64,
}

impl From<&Event> for Interval {
    fn from(e: &Event) -> Self {
        Interval { kind: e.kind(), start_ms: e.start_ms(), end_ms: e.end_ms() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCounts {
    pub matched: usize,
    pub n_truth: usize,
    pub n_detected: usize,
}

impl MatchCounts {
    pub fn add(&mut self, other: MatchCounts) {
        self.matched += other.matched;
        self.n_truth += other.n_truth;
        self.n_detected += other.n_detected;
    }

    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.n_detected)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.n_truth)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// One-to-one matching of detected against true events. A pair is eligible
/// when kinds agree and the overlap covers at least `min_overlap` of the
/// shorter interval; eligible pairs are taken greedily by overlap.
pub fn match_events(truth: &[Interval], detected: &[Interval], min_overlap: f64) -> MatchCounts {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, t) in truth.iter().enumerate() {
        for (j, d) in detected.iter().enumerate() {
            if t.kind != d.kind {
                continue;
            }
            let inter = t.end_ms.min(d.end_ms) - t.start_ms.max(d.start_ms);
            if inter <= 0.0 {
                continue;
            }
            let shorter = (t.end_ms - t.start_ms).min(d.end_ms - d.start_ms);
            let frac = if shorter > 0.0 { inter / shorter } else { 0.0 };
            if frac >= min_overlap {
                pairs.push((frac, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_t = alloc::vec![false; truth.len()];
    let mut used_d = alloc::vec![false; detected.len()];
    let mut matched = 0;
    for (_, i, j) in pairs {
        if !used_t[i] && !used_d[j] {
            used_t[i] = true;
            used_d[j] = true;
            matched += 1;
        }
    }
    MatchCounts { matched, n_truth: truth.len(), n_detected: detected.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    const DT: f64 = 1000.0 / 60.0;

    fn rec(points: &[(f64, f64)]) -> DegreeRecording {
        DegreeRecording {
            participant_id: String::from("P1"),
            stimulus_id: String::from("S1"),
            samples: points
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| DegreeSample {
                    t_ms: i as f64 * DT,
                    pos: Point::new(x, y),
                    pupil_left_mm: Some(3.0),
                    pupil_right_mm: Some(3.5),
                    valid: true,
                    interpolated: false,
                })
                .collect(),
        }
    }

    #[test]
    fn stationary_gaze_has_zero_speed() {
        let r = rec(&[(1.0, 2.0); 10]);
        let v = compute_velocity_series(&r).unwrap();
        assert_eq!(v.len(), 10);
        assert!(v.iter().all(|s| s.speed_dps == 0.0));
    }

    #[test]
    fn uniform_drift_speed() {
        let pts: Vec<_> = (0..10).map(|i| (i as f64, 0.0)).collect();
        let v = compute_velocity_series(&rec(&pts)).unwrap();
        // (x[i+1] - x[i-1]) / (2 dt) = 2 deg / 33.33 ms = 60 dps
        for s in &v[1..9] {
            assert!((s.speed_dps - 60.0).abs() < 1e-9);
        }
    }

    #[test]
    fn two_samples_too_few() {
        assert_eq!(compute_velocity_series(&rec(&[(0.0, 0.0); 2])), Err(EventError::TooFewSamples(2)));
    }

    #[test]
    fn invalid_samples_skip_velocity() {
        let mut r = rec(&[(0.0, 0.0); 8]);
        r.samples[3].valid = false;
        let v = compute_velocity_series(&r).unwrap();
        assert_eq!(v.len(), 7);
        assert!(v.iter().all(|s| s.index != 3));
    }

    #[test]
    fn single_cluster_one_fixation() {
        let events = detect_events_ivt(&rec(&[(0.0, 0.0); 30]), &IvtParams::default()).unwrap();
        assert_eq!(events.len(), 1);
        let f = events[0].as_fixation().unwrap();
        assert!((f.duration_ms - 29.0 * DT).abs() < 1e-9);
        assert_eq!(f.dispersion_deg, 0.0);
        assert_eq!(f.mean_pupil_left_mm, Some(3.0));
    }

    #[test]
    fn jump_gives_fixation_saccade_fixation() {
        let mut pts = alloc::vec![(0.0, 0.0); 20];
        pts.extend(core::iter::repeat_n((5.0, 0.0), 20));
        let events = detect_events_ivt(&rec(&pts), &IvtParams::default()).unwrap();
        let kinds: Vec<_> = events.iter().map(|e| e.kind()).collect();
        assert_eq!(kinds, [EventKind::Fixation, EventKind::Saccade, EventKind::Fixation]);
        let s = events[1].as_saccade().unwrap();
        assert!((s.amplitude_deg - 5.0).abs() < 1e-12);
        // central difference across the step: 5 deg over two intervals
        assert!((s.peak_velocity_dps - 150.0).abs() < 1e-9);
        assert!(s.peak_velocity_dps >= s.mean_velocity_dps && s.mean_velocity_dps > 0.0);
    }

    #[test]
    fn all_invalid_is_empty() {
        let mut r = rec(&[(0.0, 0.0); 10]);
        r.samples.iter_mut().for_each(|s| s.valid = false);
        assert!(detect_events_ivt(&r, &IvtParams::default()).unwrap().is_empty());
    }

    fn fix(start: f64, end: f64, x: f64) -> Event {
        Event::Fixation(FixationEvent {
            start_ms: start,
            end_ms: end,
            duration_ms: end - start,
            centroid_deg: Point::new(x, 0.0),
            dispersion_deg: 0.0,
            mean_pupil_left_mm: Some(3.0),
            mean_pupil_right_mm: None,
        })
    }

    fn sac(start: f64, end: f64, x0: f64, x1: f64) -> Event {
        Event::Saccade(SaccadeEvent::from_endpoints(start, end, Point::new(x0, 0.0), Point::new(x1, 0.0), 100.0, 80.0))
    }

    #[test]
    fn merge_identity_when_far_apart() {
        let evs = [fix(0.0, 200.0, 0.0), sac(200.0, 230.0, 0.0, 3.0), fix(230.0, 400.0, 3.0)];
        assert_eq!(merge_and_filter_events(&evs, &MergeParams::default()), evs);
    }

    #[test]
    fn merge_same_centroid() {
        let evs = [fix(0.0, 100.0, 1.0), fix(110.0, 210.0, 1.0)];
        let out = merge_and_filter_events(&evs, &MergeParams::default());
        assert_eq!(out.len(), 1);
        let f = out[0].as_fixation().unwrap();
        assert_eq!(f.duration_ms, 210.0);
        assert_eq!(f.centroid_deg, Point::new(1.0, 0.0));
    }

    #[test]
    fn merge_only_first_pair() {
        // Hand trace: F1/F2 are 0.2 deg apart with a 20 ms saccade between,
        // so they merge; the merged centroid is 0.1 deg and F3 sits 2.9 deg
        // away, so it stays separate.
        let evs = [
            fix(0.0, 100.0, 0.0),
            sac(100.0, 120.0, 0.0, 0.2),
            fix(120.0, 220.0, 0.2),
            sac(220.0, 250.0, 0.2, 3.0),
            fix(250.0, 400.0, 3.0),
        ];
        let out = merge_and_filter_events(&evs, &MergeParams::default());
        let fixes: Vec<_> = out.iter().filter_map(|e| e.as_fixation()).collect();
        assert_eq!(fixes.len(), 2);
        assert!((fixes[0].centroid_deg.x - 0.1).abs() < 1e-12);
        assert_eq!(fixes[0].duration_ms, 220.0);
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn short_fixation_dropped_and_saccades_joined() {
        let evs = [
            fix(0.0, 200.0, 0.0),
            sac(200.0, 220.0, 0.0, 2.0),
            fix(220.0, 250.0, 2.0),
            sac(250.0, 270.0, 2.0, 5.0),
            fix(270.0, 500.0, 5.0),
        ];
        let out = merge_and_filter_events(&evs, &MergeParams::default());
        assert_eq!(out.len(), 3);
        let s = out[1].as_saccade().unwrap();
        assert_eq!((s.start_ms, s.end_ms), (200.0, 270.0));
        assert!((s.amplitude_deg - 5.0).abs() < 1e-12);
    }

    #[test]
    fn matching_counts() {
        let t = [
            Interval { kind: EventKind::Fixation, start_ms: 0.0, end_ms: 200.0 },
            Interval { kind: EventKind::Saccade, start_ms: 200.0, end_ms: 230.0 },
            Interval { kind: EventKind::Fixation, start_ms: 230.0, end_ms: 400.0 },
        ];
        let d = [
            Interval { kind: EventKind::Fixation, start_ms: 0.0, end_ms: 190.0 },
            Interval { kind: EventKind::Saccade, start_ms: 195.0, end_ms: 228.0 },
            Interval { kind: EventKind::Saccade, start_ms: 300.0, end_ms: 310.0 },
        ];
        let m = match_events(&t, &d, 0.5);
        assert_eq!(m, MatchCounts { matched: 2, n_truth: 3, n_detected: 3 });
        assert!((m.f1() - 2.0 / 3.0).abs() < 1e-12);
    }
}
