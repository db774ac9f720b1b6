//! Synthetic reading-span cohorts with ground-truth events.
//!
//! Each stimulus presentation is read left to right, one fixation per word
//! with occasional regressions and skips, and ends on the decision letter.
//! Saccade durations follow the main-sequence duration relation and the
//! trajectory between landing points is minimum-jerk. Group effects shift
//! and scatter landing points before sensor noise is added.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, sqrt};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::aoi::{AoiKind, AoiSet, WORD_PITCH_PX};
use crate::events::{match_events, Event, FixationEvent, Interval, MatchCounts, SaccadeEvent};
use crate::geometry::{Point, ScreenGeometry};
use crate::ingest::{Gender, GazeRecording, GazeSample, Label, ParticipantMeta};
use crate::mainseq::MainSequenceModel;
use crate::rng::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("no AOIs for stimulus {0}")]
    MissingAoi(String),
    #[error("invalid cohort spec: {0}")]
    BadSpec(&'static str),
}

/// Differences applied to the affected group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupEffects {
    /// Added to every landing point's vertical position (positive is down).
    pub fixation_y_offset_deg: f64,
    /// Multiplies the landing jitter.
    pub scanpath_dispersion_scale: f64,
    /// Added to the regression probability.
    pub regression_rate_delta: f64,
    /// Probability of an extra fixation off the text line before each word.
    pub extra_offstimulus_fixation_rate: f64,
    /// Added to both pupil diameters.
    pub pupil_shift_mm: f64,
}

impl GroupEffects {
    pub const NONE: GroupEffects = GroupEffects {
        fixation_y_offset_deg: 0.0,
        scanpath_dispersion_scale: 1.0,
        regression_rate_delta: 0.0,
        extra_offstimulus_fixation_rate: 0.0,
        pupil_shift_mm: 0.0,
    };

    pub const STRONG: GroupEffects = GroupEffects {
        fixation_y_offset_deg: 1.5,
        scanpath_dispersion_scale: 2.0,
        regression_rate_delta: 0.0,
        extra_offstimulus_fixation_rate: 0.0,
        pupil_shift_mm: 0.0,
    };

    fn is_finite(&self) -> bool {
        [
            self.fixation_y_offset_deg,
            self.scanpath_dispersion_scale,
            self.regression_rate_delta,
            self.extra_offstimulus_fixation_rate,
            self.pupil_shift_mm,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

impl Default for GroupEffects {
    /// Moderate effects: a lower, more scattered scanpath with more
    /// regressions and the occasional off-line fixation.
    fn default() -> Self {
        GroupEffects {
            fixation_y_offset_deg: 0.5,
            scanpath_dispersion_scale: 1.3,
            regression_rate_delta: 0.05,
            extra_offstimulus_fixation_rate: 0.05,
            pupil_shift_mm: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub n_per_group: usize,
    pub seed: u64,
    pub rate_hz: f64,
    /// Radial RMS of the additive position noise.
    pub noise_rms_deg: f64,
    /// Relative SD of the multiplicative noise on saccade duration and peak velocity.
    pub saccade_noise: f64,
    pub fixation_median_ms: f64,
    pub fixation_sigma_log: f64,
    /// Fixation durations are clamped to at least this.
    pub fixation_min_ms: f64,
    pub regression_prob: f64,
    pub skip_prob: f64,
    /// Per-axis SD of landing points around the word centre.
    pub landing_jitter_deg: f64,
    pub pupil_mm: f64,
    pub pupil_noise_mm: f64,
    pub effects: GroupEffects,
    /// Group the effects apply to.
    pub affected: Label,
    pub mainseq: MainSequenceModel,
    pub geometry: ScreenGeometry,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self {
            n_per_group: 7,
            seed: 1,
            rate_hz: 60.0,
            noise_rms_deg: 0.34,
            saccade_noise: 0.05,
            fixation_median_ms: 220.0,
            fixation_sigma_log: 0.35,
            fixation_min_ms: 100.0,
            regression_prob: 0.12,
            skip_prob: 0.08,
            landing_jitter_deg: 0.15,
            pupil_mm: 3.5,
            pupil_noise_mm: 0.05,
            effects: GroupEffects::default(),
            affected: Label::Adhd,
            mainseq: MainSequenceModel::NORMATIVE,
            geometry: ScreenGeometry::default(),
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_per_group < 1 {
            return Err(SynthError::BadSpec("n_per_group must be at least 1"));
        }
        if !(self.noise_rms_deg >= 0.0) || !(self.saccade_noise >= 0.0) || !(self.landing_jitter_deg >= 0.0) {
            return Err(SynthError::BadSpec("noise magnitudes must be non-negative"));
        }
        if !(self.rate_hz > 0.0) || !self.rate_hz.is_finite() {
            return Err(SynthError::BadSpec("rate_hz must be positive"));
        }
        if !(self.fixation_median_ms > 0.0) || !(self.fixation_sigma_log >= 0.0) || !(self.fixation_min_ms >= 0.0) {
            return Err(SynthError::BadSpec("fixation duration parameters out of range"));
        }
        if !self.effects.is_finite() || !(self.effects.scanpath_dispersion_scale >= 0.0) {
            return Err(SynthError::BadSpec("effects must be finite with a non-negative dispersion scale"));
        }
        for p in [self.regression_prob, self.skip_prob] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::BadSpec("probabilities must lie in [0, 1]"));
            }
        }
        self.geometry.validate().map_err(|_| SynthError::BadSpec("invalid screen geometry"))
    }

    pub fn effects_for(&self, label: Label) -> GroupEffects {
        if label == self.affected {
            self.effects
        } else {
            GroupEffects::NONE
        }
    }
}

/// Ground-truth events of one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecording {
    pub participant_id: String,
    pub stimulus_id: String,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub recordings: Vec<GazeRecording>,
    pub truth: Vec<TruthRecording>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub meta: Vec<ParticipantMeta>,
    /// All recordings, participant-major in stimulus order.
    pub recordings: Vec<GazeRecording>,
    pub truth: Vec<TruthRecording>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// A planned fixation.
struct Planned {
    at: Point,
    duration_ms: f64,
}

fn plan_scanpath(
    stimulus: &crate::aoi::StimulusAois,
    spec: &CohortSpec,
    fx: &GroupEffects,
    rng: &mut ChaCha8Rng,
) -> Vec<Planned> {
    let g = &spec.geometry;
    let line = stimulus.rect(AoiKind::Sentence);
    let n_words = libm::round(line.w_px / WORD_PITCH_PX).max(1.0) as usize;
    let y_px = line.y_px + 0.5 * line.h_px;
    let word = |i: usize| g.pixels_to_degrees(Point::new(line.x_px + (i as f64 + 0.5) * WORD_PITCH_PX, y_px));
    let jitter = spec.landing_jitter_deg * fx.scanpath_dispersion_scale;
    let p_reg = (spec.regression_prob + fx.regression_rate_delta).clamp(0.0, 1.0);
    let duration = |rng: &mut ChaCha8Rng| {
        (spec.fixation_median_ms * exp(spec.fixation_sigma_log * normal(rng))).max(spec.fixation_min_ms)
    };
    let land = |target: Point, rng: &mut ChaCha8Rng| {
        let dx = jitter * normal(rng);
        let dy = jitter * normal(rng);
        Point::new(target.x + dx, target.y + dy + fx.fixation_y_offset_deg)
    };
    let mut targets: Vec<Point> = Vec::new();
    let mut frontier = 0usize;
    targets.push(word(0));
    let cap = 4 * n_words + 4;
    while targets.len() < cap {
        let u: f64 = rng.random();
        if u < p_reg && frontier > 0 {
            let back = if rng.random::<f64>() < 0.3 { 2 } else { 1 };
            targets.push(word(frontier.saturating_sub(back)));
        } else if frontier + 1 < n_words {
            let step = if rng.random::<f64>() < spec.skip_prob && frontier + 2 < n_words { 2 } else { 1 };
            frontier += step;
            targets.push(word(frontier));
        } else {
            break;
        }
    }
    targets.push(g.pixels_to_degrees(stimulus.rect(AoiKind::DecisionLetter).center()));
    let mut out = Vec::with_capacity(targets.len() + 4);
    for (k, t) in targets.into_iter().enumerate() {
        // Draw unconditionally so the stream does not depend on the rate.
        let off = rng.random::<f64>() < fx.extra_offstimulus_fixation_rate;
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let dy = side * (2.5 + libm::fabs(normal(rng)));
        let dx = normal(rng);
        if off && k > 0 {
            out.push(Planned { at: Point::new(t.x + dx, t.y + dy), duration_ms: duration(rng) });
        }
        let at = land(t, rng);
        out.push(Planned { at, duration_ms: duration(rng) });
    }
    out
}

fn min_jerk(tau: f64) -> f64 {
    let t3 = tau * tau * tau;
    t3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)
}

/// Generates every stimulus of `stimuli` for one participant.
pub fn generate_session(
    meta: &ParticipantMeta,
    stimuli: &[String],
    aois: &AoiSet,
    spec: &CohortSpec,
    session_seed: u64,
) -> Result<Session, SynthError> {
    spec.validate()?;
    let fx = spec.effects_for(meta.label);
    let dt = 1000.0 / spec.rate_hz;
    let sigma = spec.noise_rms_deg / sqrt(2.0);
    let pupil_left = spec.pupil_mm + fx.pupil_shift_mm;
    let pupil_right = pupil_left + 0.05;
    let mut recordings = Vec::with_capacity(stimuli.len());
    let mut truth = Vec::with_capacity(stimuli.len());
    for (si, stimulus_id) in stimuli.iter().enumerate() {
        let stim = aois.stimulus(stimulus_id).ok_or_else(|| SynthError::MissingAoi(stimulus_id.clone()))?;
        let mut rng = rng_for(session_seed, &[si as u64]);
        let plan = plan_scanpath(stim, spec, &fx, &mut rng);
        // Timeline of alternating fixations and saccades.
        let mut events: Vec<Event> = Vec::with_capacity(2 * plan.len());
        let mut t = 0.0;
        for (k, f) in plan.iter().enumerate() {
            let start = t;
            t += f.duration_ms;
            events.push(Event::Fixation(FixationEvent {
                start_ms: start,
                end_ms: t,
                duration_ms: f.duration_ms,
                centroid_deg: f.at,
                dispersion_deg: spec.noise_rms_deg,
                mean_pupil_left_mm: Some(pupil_left),
                mean_pupil_right_mm: Some(pupil_right),
            }));
            if let Some(next) = plan.get(k + 1) {
                let amp = f.at.distance(&next.at);
                let dur_noise = (1.0 + spec.saccade_noise * normal(&mut rng)).max(0.5);
                let vel_noise = (1.0 + spec.saccade_noise * normal(&mut rng)).max(0.5);
                let dur = spec.mainseq.duration_unchecked(amp) * dur_noise;
                let peak = spec.mainseq.velocity_unchecked(amp) * vel_noise;
                let mean = if dur > 0.0 { amp / dur * 1000.0 } else { 0.0 };
                events.push(Event::Saccade(SaccadeEvent::from_endpoints(t, t + dur, f.at, next.at, peak, mean)));
                t += dur;
            }
        }
        let end = t;
        let n = libm::floor(end / dt) as usize + 1;
        let mut samples = Vec::with_capacity(n);
        let mut e = 0usize;
        for i in 0..n {
            let ts = i as f64 * dt;
            while e + 1 < events.len() && ts >= events[e].end_ms() {
                e += 1;
            }
            let clean = match &events[e] {
                Event::Fixation(f) => f.centroid_deg,
                Event::Saccade(s) => {
                    let tau = ((ts - s.start_ms) / s.duration_ms).clamp(0.0, 1.0);
                    let m = min_jerk(tau);
                    Point::new(s.start_deg.x + m * (s.end_deg.x - s.start_deg.x), s.start_deg.y + m * (s.end_deg.y - s.start_deg.y))
                }
            };
            let noisy = Point::new(clean.x + sigma * normal(&mut rng), clean.y + sigma * normal(&mut rng));
            let px = spec.geometry.degrees_to_pixels(noisy);
            let pl = pupil_left + spec.pupil_noise_mm * normal(&mut rng);
            let pr = pupil_right + spec.pupil_noise_mm * normal(&mut rng);
            samples.push(GazeSample {
                t_ms: ts,
                x_px: px.x,
                y_px: px.y,
                pupil_left_mm: Some(pl),
                pupil_right_mm: Some(pr),
                valid_left: true,
                valid_right: true,
                interpolated: false,
            });
        }
        recordings.push(GazeRecording {
            participant_id: meta.id.clone(),
            stimulus_id: stimulus_id.clone(),
            samples,
            nominal_rate_hz: spec.rate_hz,
        });
        truth.push(TruthRecording { participant_id: meta.id.clone(), stimulus_id: stimulus_id.clone(), events });
    }
    Ok(Session { recordings, truth })
}

/// Ages of the published sample, drawn from uniformly.
const AGES: [u32; 14] = [18, 35, 19, 23, 21, 32, 20, 21, 19, 26, 29, 21, 21, 23];

/// Participant list: `P01..` with the NonADHD group first. Both groups get
/// the same gender sequence (two men in every seven).
pub fn cohort_meta(spec: &CohortSpec) -> Vec<ParticipantMeta> {
    let mut rng = rng_for(spec.seed, &[u64::MAX]);
    let mut out = Vec::with_capacity(2 * spec.n_per_group);
    for (g, label) in [Label::NonAdhd, Label::Adhd].into_iter().enumerate() {
        for i in 0..spec.n_per_group {
            let gender = if matches!(i % 7, 1 | 4) { Gender::Male } else { Gender::Female };
            let age = AGES[rng.random_range(0..AGES.len())];
            out.push(ParticipantMeta { id: format!("P{:02}", g * spec.n_per_group + i + 1), age, gender, label });
        }
    }
    out
}

/// Generates `2 * n_per_group` sessions over every stimulus of `aois`.
pub fn generate_cohort(spec: &CohortSpec, aois: &AoiSet) -> Result<Cohort, SynthError> {
    spec.validate()?;
    let meta = cohort_meta(spec);
    let stimuli: Vec<String> = aois.stimulus_ids().map(String::from).collect();
    let mut recordings = Vec::new();
    let mut truth = Vec::new();
    for (i, m) in meta.iter().enumerate() {
        let s = generate_session(m, &stimuli, aois, spec, session_seed(spec, i))?;
        recordings.extend(s.recordings);
        truth.extend(s.truth);
    }
    Ok(Cohort { meta, recordings, truth })
}

/// Seed of the `index`-th session so sessions can be generated independently.
pub fn session_seed(spec: &CohortSpec, index: usize) -> u64 {
    derive_seed(spec.seed, &[index as u64])
}

/// One-to-one event matching of detected against true events (same kind,
/// overlap of at least half the shorter interval).
pub fn score_detection(truth: &[Event], detected: &[Event]) -> MatchCounts {
    let t: Vec<Interval> = truth.iter().map(Interval::from).collect();
    let d: Vec<Interval> = detected.iter().map(Interval::from).collect();
    match_events(&t, &d, 0.5)
}
