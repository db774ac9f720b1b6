//! Gaze samples, recordings and dropout repair.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::geometry::{Point, ScreenGeometry};

/// Default ceiling for dropout interpolation.
pub const DEFAULT_MAX_GAP_MS: f64 = 75.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecordingError {
    #[error("recording {participant}/{stimulus}: timestamps not strictly increasing at sample {index}")]
    NonMonotoneTime { participant: String, stimulus: String, index: usize },
    #[error("recording {participant}/{stimulus}: median interval {median_ms:.3} ms is outside ±20% of nominal {nominal_ms:.3} ms")]
    RateMismatch { participant: String, stimulus: String, median_ms: f64, nominal_ms: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Adhd,
    NonAdhd,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Adhd, Label::NonAdhd];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Adhd => "ADHD",
            Label::NonAdhd => "NonADHD",
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Adhd
    }

    pub fn swapped(self) -> Label {
        match self {
            Label::Adhd => Label::NonAdhd,
            Label::NonAdhd => Label::Adhd,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = UnknownCategory;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ADHD" => Ok(Label::Adhd),
            "NonADHD" | "Non-ADHD" => Ok(Label::NonAdhd),
            other => Err(UnknownCategory(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Female,
    Male,
    Other,
}

impl Gender {
    pub const ALL: [Gender; 3] = [Gender::Female, Gender::Male, Gender::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Other => "other",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = UnknownCategory;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" => Ok(Gender::Female),
            "male" | "m" => Ok(Gender::Male),
            "other" => Ok(Gender::Other),
            _ => Err(UnknownCategory(s.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantMeta {
    pub id: String,
    pub age: u32,
    pub gender: Gender,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    pub t_ms: f64,
    pub x_px: f64,
    pub y_px: f64,
    pub pupil_left_mm: Option<f64>,
    pub pupil_right_mm: Option<f64>,
    pub valid_left: bool,
    pub valid_right: bool,
    /// Set when the position was filled in by [`validate_and_interpolate`].
    pub interpolated: bool,
}

impl GazeSample {
    /// A sample counts as valid when either eye was tracked or the gap was repaired.
    pub fn is_valid(&self) -> bool {
        self.valid_left || self.valid_right || self.interpolated
    }

    pub fn position(&self) -> Point {
        Point::new(self.x_px, self.y_px)
    }
}

/// Samples for one participant viewing one stimulus, in screen pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct GazeRecording {
    pub participant_id: String,
    pub stimulus_id: String,
    pub samples: Vec<GazeSample>,
    pub nominal_rate_hz: f64,
}

impl GazeRecording {
    /// Checks strict time ordering and that the median sampling interval is
    /// within 20% of the nominal rate.
    pub fn validate(&self) -> Result<(), RecordingError> {
        for (i, w) in self.samples.windows(2).enumerate() {
            if !(w[1].t_ms > w[0].t_ms) {
                return Err(RecordingError::NonMonotoneTime {
                    participant: self.participant_id.clone(),
                    stimulus: self.stimulus_id.clone(),
                    index: i + 1,
                });
            }
        }
        if self.samples.len() >= 2 {
            let mut dts: Vec<f64> = self.samples.windows(2).map(|w| w[1].t_ms - w[0].t_ms).collect();
            dts.sort_by(f64::total_cmp);
            let median = if dts.len() % 2 == 1 {
                dts[dts.len() / 2]
            } else {
                0.5 * (dts[dts.len() / 2 - 1] + dts[dts.len() / 2])
            };
            let nominal = 1000.0 / self.nominal_rate_hz;
            if libm::fabs(median - nominal) > 0.2 * nominal {
                return Err(RecordingError::RateMismatch {
                    participant: self.participant_id.clone(),
                    stimulus: self.stimulus_id.clone(),
                    median_ms: median,
                    nominal_ms: nominal,
                });
            }
        }
        Ok(())
    }

    pub fn valid_count(&self) -> usize {
        self.samples.iter().filter(|s| s.is_valid()).count()
    }

    /// Converts every sample to visual angle. Invalid samples keep their flag
    /// and carry whatever position the tracker reported.
    pub fn to_degrees(&self, geometry: &ScreenGeometry) -> DegreeRecording {
        let samples = self
            .samples
            .iter()
            .map(|s| DegreeSample {
                t_ms: s.t_ms,
                pos: geometry.pixels_to_degrees(s.position()),
                pupil_left_mm: s.pupil_left_mm,
                pupil_right_mm: s.pupil_right_mm,
                valid: s.is_valid(),
                interpolated: s.interpolated,
            })
            .collect();
        DegreeRecording {
            participant_id: self.participant_id.clone(),
            stimulus_id: self.stimulus_id.clone(),
            samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeSample {
    pub t_ms: f64,
    pub pos: Point,
    pub pupil_left_mm: Option<f64>,
    pub pupil_right_mm: Option<f64>,
    pub valid: bool,
    pub interpolated: bool,
}

/// A recording expressed in degrees of visual angle about the screen centre.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeRecording {
    pub participant_id: String,
    pub stimulus_id: String,
    pub samples: Vec<DegreeSample>,
}

/// Repairs short tracker dropouts by linear interpolation in pixel space.
///
/// A run of invalid samples is filled when it has a valid neighbour on both
/// sides and the time between those neighbours is below `max_gap_ms`.
/// Longer runs and runs touching either end of the recording stay invalid.
pub fn validate_and_interpolate(r: &GazeRecording, max_gap_ms: f64) -> GazeRecording {
    let mut out = r.clone();
    let s = &mut out.samples;
    let n = s.len();
    let mut i = 0;
    while i < n {
        if s[i].is_valid() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !s[i].is_valid() {
            i += 1;
        }
        // invalid run is start..i
        if start == 0 || i == n {
            continue;
        }
        let (a, b) = (s[start - 1], s[i]);
        if b.t_ms - a.t_ms >= max_gap_ms {
            continue;
        }
        let span = b.t_ms - a.t_ms;
        for sample in &mut s[start..i] {
            let f = (sample.t_ms - a.t_ms) / span;
            sample.x_px = a.x_px + f * (b.x_px - a.x_px);
            sample.y_px = a.y_px + f * (b.y_px - a.y_px);
            sample.pupil_left_mm = lerp_opt(a.pupil_left_mm, b.pupil_left_mm, f);
            sample.pupil_right_mm = lerp_opt(a.pupil_right_mm, b.pupil_right_mm, f);
            sample.interpolated = true;
        }
    }
    out
}

fn lerp_opt(a: Option<f64>, b: Option<f64>, f: f64) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a + f * (b - a)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample(t: f64, x: f64, y: f64, valid: bool) -> GazeSample {
        GazeSample {
            t_ms: t,
            x_px: x,
            y_px: y,
            pupil_left_mm: Some(3.0),
            pupil_right_mm: Some(3.2),
            valid_left: valid,
            valid_right: valid,
            interpolated: false,
        }
    }

    fn recording(samples: Vec<GazeSample>) -> GazeRecording {
        GazeRecording { participant_id: "P1".into(), stimulus_id: "S1".into(), samples, nominal_rate_hz: 60.0 }
    }

    const DT: f64 = 1000.0 / 60.0;

    #[test]
    fn clean_recording_is_unchanged() {
        let r = recording((0..10).map(|i| sample(i as f64 * DT, 10.0 * i as f64, 5.0, true)).collect());
        assert_eq!(validate_and_interpolate(&r, 75.0), r);
    }

    #[test]
    fn single_dropout_is_midpoint() {
        let r = recording(vec![
            sample(0.0, 100.0, 100.0, true),
            sample(DT, -1.0, -1.0, false),
            sample(2.0 * DT, 102.0, 102.0, true),
        ]);
        let out = validate_and_interpolate(&r, 75.0);
        let mid = out.samples[1];
        assert!(mid.interpolated && mid.is_valid());
        assert!((mid.x_px - 101.0).abs() < 1e-12 && (mid.y_px - 101.0).abs() < 1e-12);
        assert_eq!(out.samples[0], r.samples[0]);
        assert_eq!(out.samples[2], r.samples[2]);
    }

    #[test]
    fn long_dropout_stays_invalid() {
        // 10 invalid samples: neighbours are 11 intervals (~183 ms) apart.
        let mut v: Vec<_> = (0..20).map(|i| sample(i as f64 * DT, 300.0, 300.0, true)).collect();
        for s in &mut v[5..15] {
            s.valid_left = false;
            s.valid_right = false;
        }
        let r = recording(v);
        let out = validate_and_interpolate(&r, 75.0);
        assert_eq!(out, r);
        assert_eq!(out.samples.len(), 20);
    }

    #[test]
    fn edge_runs_not_extrapolated() {
        let r = recording(vec![
            sample(0.0, 0.0, 0.0, false),
            sample(DT, 10.0, 10.0, true),
            sample(2.0 * DT, 20.0, 20.0, true),
            sample(3.0 * DT, 0.0, 0.0, false),
        ]);
        assert_eq!(validate_and_interpolate(&r, 75.0), r);
    }

    #[test]
    fn one_eye_is_enough() {
        let mut s = sample(0.0, 1.0, 1.0, false);
        s.valid_right = true;
        assert!(s.is_valid());
    }

    #[test]
    fn validate_catches_time_reversal_and_rate() {
        let r = recording(vec![sample(0.0, 0.0, 0.0, true), sample(20.0, 0.0, 0.0, true), sample(10.0, 0.0, 0.0, true)]);
        assert!(matches!(r.validate(), Err(RecordingError::NonMonotoneTime { index: 2, .. })));
        let r = recording((0..10).map(|i| sample(i as f64 * 33.3, 0.0, 0.0, true)).collect());
        assert!(matches!(r.validate(), Err(RecordingError::RateMismatch { .. })));
        let r = recording((0..10).map(|i| sample(i as f64 * 16.23, 0.0, 0.0, true)).collect());
        r.validate().unwrap();
    }

    #[test]
    fn categories_parse() {
        assert_eq!("ADHD".parse::<Label>().unwrap(), Label::Adhd);
        assert_eq!("NonADHD".parse::<Label>().unwrap(), Label::NonAdhd);
        assert!("maybe".parse::<Label>().is_err());
        assert_eq!("Female".parse::<Gender>().unwrap(), Gender::Female);
    }
}
