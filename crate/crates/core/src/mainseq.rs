//! Saccadic main sequence: amplitude to peak velocity (saturating
//! exponential) and amplitude to duration (affine).

use alloc::vec::Vec;

use libm::{exp, log, sqrt};
use thiserror::Error;

use crate::events::SaccadeEvent;
use crate::ingest::Label;

/// Minimum number of saccades accepted by [`fit_main_sequence`].
pub const MIN_FIT_SACCADES: usize = 8;
/// Peak velocities above this are treated as artefacts and excluded from fits.
pub const MAX_PLAUSIBLE_PEAK_DPS: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MainSeqError {
    #[error("amplitude must be non-negative, got {0}")]
    NegativeAmplitude(f64),
    #[error("need at least {MIN_FIT_SACCADES} saccades, got {0}")]
    TooFewSaccades(usize),
    #[error("amplitude range {0:.4} deg is too narrow to fit")]
    DegenerateAmplitudeRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainSequenceModel {
    /// Asymptotic peak velocity.
    pub theta_max_dps: f64,
    /// Amplitude constant of the velocity saturation.
    pub c_deg: f64,
    pub slope_ms_per_deg: f64,
    pub intercept_ms: f64,
}

impl MainSequenceModel {
    /// 500 deg/s asymptote, C = 14, duration = 2.2 ms/deg * A + 21 ms.
    pub const NORMATIVE: MainSequenceModel =
        MainSequenceModel { theta_max_dps: 500.0, c_deg: 14.0, slope_ms_per_deg: 2.2, intercept_ms: 21.0 };

    pub fn velocity_unchecked(&self, amplitude_deg: f64) -> f64 {
        self.theta_max_dps * (1.0 - exp(-amplitude_deg / self.c_deg))
    }

    pub fn duration_unchecked(&self, amplitude_deg: f64) -> f64 {
        self.slope_ms_per_deg * amplitude_deg + self.intercept_ms
    }
}

impl Default for MainSequenceModel {
    fn default() -> Self {
        Self::NORMATIVE
    }
}

pub fn predict_peak_velocity(amplitude_deg: f64, m: &MainSequenceModel) -> Result<f64, MainSeqError> {
    if !(amplitude_deg >= 0.0) {
        return Err(MainSeqError::NegativeAmplitude(amplitude_deg));
    }
    Ok(m.velocity_unchecked(amplitude_deg))
}

pub fn predict_duration(amplitude_deg: f64, m: &MainSequenceModel) -> Result<f64, MainSeqError> {
    if !(amplitude_deg >= 0.0) {
        return Err(MainSeqError::NegativeAmplitude(amplitude_deg));
    }
    Ok(m.duration_unchecked(amplitude_deg))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainSequenceFit {
    pub model: MainSequenceModel,
    pub n_used: usize,
    /// Saccades dropped for exceeding [`MAX_PLAUSIBLE_PEAK_DPS`].
    pub n_outliers: usize,
    pub sse_velocity: f64,
}

/// Sum of squared velocity residuals and the least-squares asymptote for a
/// fixed `c`. For fixed `c` the model is linear in `theta_max`, so the
/// optimum is closed form.
fn profile(amp: &[f64], vel: &[f64], c: f64) -> (f64, f64) {
    let (mut gv, mut gg) = (0.0, 0.0);
    for (&a, &v) in amp.iter().zip(vel) {
        let g = 1.0 - exp(-a / c);
        gv += g * v;
        gg += g * g;
    }
    let theta = if gg > 0.0 { gv / gg } else { 0.0 };
    (sse(amp, vel, theta, c), theta)
}

fn sse(amp: &[f64], vel: &[f64], theta: f64, c: f64) -> f64 {
    amp.iter()
        .zip(vel)
        .map(|(&a, &v)| {
            let r = v - theta * (1.0 - exp(-a / c));
            r * r
        })
        .sum()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (log(lo), log(hi));
    (0..n).map(move |i| exp(a + (b - a) * i as f64 / (n - 1) as f64))
}

/// Fits both main-sequence relations to observed saccades.
///
/// The velocity relation is fitted by a log-spaced grid over
/// `theta_max in [100, 1000]`, `c in [2, 50]`, then refined by coordinate
/// descent: each sweep moves `c` by a shrinking multiplicative step while
/// `theta_max` is re-solved exactly, until the relative step falls below
/// 1e-10. The duration relation is ordinary least squares.
pub fn fit_main_sequence(saccades: &[SaccadeEvent]) -> Result<MainSequenceFit, MainSeqError> {
    let kept: Vec<&SaccadeEvent> = saccades.iter().filter(|s| s.peak_velocity_dps <= MAX_PLAUSIBLE_PEAK_DPS).collect();
    let n_outliers = saccades.len() - kept.len();
    if kept.len() < MIN_FIT_SACCADES {
        return Err(MainSeqError::TooFewSaccades(kept.len()));
    }
    let amp: Vec<f64> = kept.iter().map(|s| s.amplitude_deg).collect();
    let vel: Vec<f64> = kept.iter().map(|s| s.peak_velocity_dps).collect();
    let dur: Vec<f64> = kept.iter().map(|s| s.duration_ms).collect();
    let lo = amp.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = amp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.1 {
        return Err(MainSeqError::DegenerateAmplitudeRange(hi - lo));
    }

    // coarse grid
    let mut best = (f64::INFINITY, 500.0, 14.0);
    for theta in log_grid(100.0, 1000.0, 61) {
        for c in log_grid(2.0, 50.0, 61) {
            let e = sse(&amp, &vel, theta, c);
            if e < best.0 {
                best = (e, theta, c);
            }
        }
    }

    // refinement
    let (_, _, mut c) = best;
    let (mut err, mut theta) = profile(&amp, &vel, c);
    let mut step = 0.1;
    while step > 1e-10 {
        let mut improved = false;
        for cand in [c * (1.0 + step), c / (1.0 + step)] {
            let (e, t) = profile(&amp, &vel, cand);
            if e < err {
                err = e;
                theta = t;
                c = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let n = amp.len() as f64;
    let ma = amp.iter().sum::<f64>() / n;
    let md = dur.iter().sum::<f64>() / n;
    let sxy: f64 = amp.iter().zip(&dur).map(|(a, d)| (a - ma) * (d - md)).sum();
    let sxx: f64 = amp.iter().map(|a| (a - ma) * (a - ma)).sum();
    let slope = sxy / sxx;

    Ok(MainSequenceFit {
        model: MainSequenceModel { theta_max_dps: theta, c_deg: c, slope_ms_per_deg: slope, intercept_ms: md - slope * ma },
        n_used: kept.len(),
        n_outliers,
        sse_velocity: err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Group {
    Adhd,
    NonAdhd,
    Pooled,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Adhd => "ADHD",
            Group::NonAdhd => "NonADHD",
            Group::Pooled => "pooled",
        }
    }
}

impl From<Label> for Group {
    fn from(l: Label) -> Self {
        match l {
            Label::Adhd => Group::Adhd,
            Label::NonAdhd => Group::NonAdhd,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub group: Group,
    /// RMSE of observed peak velocity against the normative curve.
    pub rmse_velocity_dps: f64,
    /// RMSE of observed duration against the normative line.
    pub rmse_duration_ms: f64,
    pub n_saccades: usize,
    pub fitted: MainSequenceFit,
    /// `(amplitude_deg, peak_velocity_dps)` per saccade.
    pub velocity_points: Vec<(f64, f64)>,
    /// `(amplitude_deg, duration_ms)` per saccade.
    pub duration_points: Vec<(f64, f64)>,
}

/// Per-group and pooled comparison against the normative model.
/// Groups with no saccades are omitted; a group that cannot be fitted
/// propagates the fit error.
pub fn deviation_report(saccades: &[SaccadeEvent], labels: &[Label]) -> Result<Vec<DeviationReport>, MainSeqError> {
    assert_eq!(saccades.len(), labels.len(), "one label per saccade");
    let norm = MainSequenceModel::NORMATIVE;
    let mut out = Vec::new();
    for group in [Group::Adhd, Group::NonAdhd, Group::Pooled] {
        let members: Vec<SaccadeEvent> = saccades
            .iter()
            .zip(labels)
            .filter(|(_, &l)| group == Group::Pooled || Group::from(l) == group)
            .map(|(s, _)| *s)
            .collect();
        if members.is_empty() {
            continue;
        }
        let fitted = fit_main_sequence(&members)?;
        let n = members.len() as f64;
        let (mut ev, mut ed) = (0.0, 0.0);
        for s in &members {
            let rv = s.peak_velocity_dps - norm.velocity_unchecked(s.amplitude_deg);
            let rd = s.duration_ms - norm.duration_unchecked(s.amplitude_deg);
            ev += rv * rv;
            ed += rd * rd;
        }
        out.push(DeviationReport {
            group,
            rmse_velocity_dps: sqrt(ev / n),
            rmse_duration_ms: sqrt(ed / n),
            n_saccades: members.len(),
            fitted,
            velocity_points: members.iter().map(|s| (s.amplitude_deg, s.peak_velocity_dps)).collect(),
            duration_points: members.iter().map(|s| (s.amplitude_deg, s.duration_ms)).collect(),
        });
    }
    Ok(out)
}

/// Samples of the model curves for plotting: `(amplitude, velocity, duration)`.
pub fn sample_curve(m: &MainSequenceModel, max_amplitude_deg: f64, n: usize) -> Vec<(f64, f64, f64)> {
    (0..n)
        .map(|i| {
            let a = max_amplitude_deg * i as f64 / (n.max(2) - 1) as f64;
            (a, m.velocity_unchecked(a), m.duration_unchecked(a))
        })
        .collect()
}
