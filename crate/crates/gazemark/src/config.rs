//! Pipeline settings: defaults, a TOML config file, then command-line flags.
//!
//! Relative paths in a config file resolve against the file's directory.
//! Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//! k = 10
//! granularity = "sentence"
//! feature_sets = ["fixation", "saccade"]
//! classifiers = ["random_forest", "logistic"]
//! grid_search = false
//!
//! [inputs]
//! gaze = "gaze.csv"
//! meta = "participants.csv"
//!
//! [detector]
//! velocity_threshold_dps = 30.0
//!
//! [synth]
//! n_per_group = 7
//! effects = "strong"
//!
//! [grids.random_forest]
//! n_trees = [50.0, 100.0]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gazemark_core::events::DetectorParams;
use gazemark_core::features::{FeatureSet, Granularity};
use gazemark_core::geometry::ScreenGeometry;
use gazemark_core::ingest::DEFAULT_MAX_GAP_MS;
use gazemark_core::ml::{default_grid, Family, Grid};
use gazemark_core::synth::{CohortSpec, GroupEffects};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub granularity: Option<String>,
    pub feature_sets: Option<Vec<String>>,
    pub classifiers: Option<Vec<String>>,
    pub grid_search: Option<bool>,
    pub nominal_rate_hz: Option<f64>,
    pub max_gap_ms: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub inputs: InputsFile,
    #[serde(default)]
    pub geometry: GeometryFile,
    #[serde(default)]
    pub detector: DetectorFile,
    #[serde(default)]
    pub synth: SynthFile,
    #[serde(default)]
    pub grids: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsFile {
    pub gaze: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub aois: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub recall_log: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    pub width_px: Option<u32>,
    pub height_px: Option<u32>,
    pub width_cm: Option<f64>,
    pub height_cm: Option<f64>,
    pub viewing_distance_cm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorFile {
    pub velocity_threshold_dps: Option<f64>,
    pub min_fixation_ms: Option<f64>,
    pub min_saccade_samples: Option<usize>,
    pub merge_angle_deg: Option<f64>,
    pub merge_gap_ms: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFile {
    pub n_per_group: Option<usize>,
    /// `none`, `default` or `strong`; the fields below override single values.
    pub effects: Option<String>,
    pub fixation_y_offset_deg: Option<f64>,
    pub scanpath_dispersion_scale: Option<f64>,
    pub regression_rate_delta: Option<f64>,
    pub extra_offstimulus_fixation_rate: Option<f64>,
    pub pupil_shift_mm: Option<f64>,
    pub noise_rms_deg: Option<f64>,
    pub rate_hz: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let mut cfg: ConfigFile = toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        let i = &mut cfg.inputs;
        for p in [&mut i.gaze, &mut i.meta, &mut i.aois, &mut i.events, &mut i.table, &mut i.recall_log, &mut cfg.out] {
            fix(p);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Inputs {
    pub gaze: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub aois: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub recall_log: Option<PathBuf>,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub k: usize,
    pub granularity: Granularity,
    pub feature_sets: Vec<FeatureSet>,
    pub classifiers: Vec<Family>,
    pub grid_search: bool,
    pub grids: BTreeMap<Family, Grid>,
    pub nominal_rate_hz: f64,
    pub max_gap_ms: f64,
    pub geometry: ScreenGeometry,
    pub detector: DetectorParams,
    pub cohort: CohortSpec,
    pub inputs: Inputs,
    pub out: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 1,
            k: 10,
            granularity: Granularity::Sentence,
            feature_sets: FeatureSet::ALL.to_vec(),
            classifiers: Family::ALL.to_vec(),
            grid_search: false,
            grids: Family::ALL.iter().map(|&f| (f, default_grid(f))).collect(),
            nominal_rate_hz: 60.0,
            max_gap_ms: DEFAULT_MAX_GAP_MS,
            geometry: ScreenGeometry::default(),
            detector: DetectorParams::default(),
            cohort: CohortSpec::default(),
            inputs: Inputs::default(),
            out: None,
        }
    }
}

pub fn parse_list<T: std::str::FromStr>(items: &[String], what: &str) -> Result<Vec<T>, ConfigError> {
    if items.is_empty() {
        return Err(ConfigError::Invalid(format!("{what} list is empty")));
    }
    items.iter().map(|s| s.trim().parse().map_err(|_| ConfigError::Invalid(format!("unknown {what} `{s}`")))).collect()
}

pub fn effects_preset(name: &str) -> Result<GroupEffects, ConfigError> {
    match name {
        "none" => Ok(GroupEffects::NONE),
        "default" => Ok(GroupEffects::default()),
        "strong" => Ok(GroupEffects::STRONG),
        other => Err(ConfigError::Invalid(format!("unknown effects preset `{other}` (none, default, strong)"))),
    }
}

impl Settings {
    /// Applies a config file on top of the defaults.
    pub fn from_file(cfg: ConfigFile) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        if let Some(v) = cfg.seed {
            s.seed = v;
        }
        if let Some(v) = cfg.k {
            s.k = v;
        }
        if let Some(v) = cfg.granularity {
            s.granularity = parse_list(&[v], "granularity")?[0];
        }
        if let Some(v) = cfg.feature_sets {
            s.feature_sets = parse_list(&v, "feature set")?;
        }
        if let Some(v) = cfg.classifiers {
            s.classifiers = parse_list(&v, "classifier")?;
        }
        if let Some(v) = cfg.grid_search {
            s.grid_search = v;
        }
        if let Some(v) = cfg.nominal_rate_hz {
            s.nominal_rate_hz = v;
        }
        if let Some(v) = cfg.max_gap_ms {
            s.max_gap_ms = v;
        }
        for (family, grid) in cfg.grids {
            let f: Family = family.parse().map_err(|_| ConfigError::Invalid(format!("grid for unknown classifier `{family}`")))?;
            s.grids.insert(f, grid);
        }
        let g = cfg.geometry;
        let geo = &mut s.geometry;
        geo.width_px = g.width_px.unwrap_or(geo.width_px);
        geo.height_px = g.height_px.unwrap_or(geo.height_px);
        geo.width_cm = g.width_cm.unwrap_or(geo.width_cm);
        geo.height_cm = g.height_cm.unwrap_or(geo.height_cm);
        geo.viewing_distance_cm = g.viewing_distance_cm.unwrap_or(geo.viewing_distance_cm);
        let d = cfg.detector;
        let det = &mut s.detector;
        det.ivt.velocity_threshold_dps = d.velocity_threshold_dps.unwrap_or(det.ivt.velocity_threshold_dps);
        if let Some(v) = d.min_fixation_ms {
            det.ivt.min_fixation_ms = v;
            det.merge.min_fixation_ms = v;
        }
        det.ivt.min_saccade_samples = d.min_saccade_samples.unwrap_or(det.ivt.min_saccade_samples);
        det.merge.merge_angle_deg = d.merge_angle_deg.unwrap_or(det.merge.merge_angle_deg);
        det.merge.merge_gap_ms = d.merge_gap_ms.unwrap_or(det.merge.merge_gap_ms);
        let y = cfg.synth;
        let c = &mut s.cohort;
        c.n_per_group = y.n_per_group.unwrap_or(c.n_per_group);
        if let Some(name) = &y.effects {
            c.effects = effects_preset(name)?;
        }
        let e = &mut c.effects;
        e.fixation_y_offset_deg = y.fixation_y_offset_deg.unwrap_or(e.fixation_y_offset_deg);
        e.scanpath_dispersion_scale = y.scanpath_dispersion_scale.unwrap_or(e.scanpath_dispersion_scale);
        e.regression_rate_delta = y.regression_rate_delta.unwrap_or(e.regression_rate_delta);
        e.extra_offstimulus_fixation_rate = y.extra_offstimulus_fixation_rate.unwrap_or(e.extra_offstimulus_fixation_rate);
        e.pupil_shift_mm = y.pupil_shift_mm.unwrap_or(e.pupil_shift_mm);
        c.noise_rms_deg = y.noise_rms_deg.unwrap_or(c.noise_rms_deg);
        c.rate_hz = y.rate_hz.unwrap_or(c.rate_hz);
        let i = cfg.inputs;
        s.inputs = Inputs { gaze: i.gaze, meta: i.meta, aois: i.aois, events: i.events, table: i.table, recall_log: i.recall_log };
        s.out = cfg.out;
        Ok(s)
    }

    /// Cross-field checks, run after flags are applied.
    pub fn validate(&mut self) -> Result<(), ConfigError> {
        if self.k < 2 {
            return Err(ConfigError::Invalid(format!("k must be at least 2, got {}", self.k)));
        }
        if !(self.nominal_rate_hz > 0.0) || !(self.max_gap_ms >= 0.0) {
            return Err(ConfigError::Invalid("nominal_rate_hz must be positive and max_gap_ms non-negative".into()));
        }
        self.geometry.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.detector.ivt.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.cohort.seed = self.seed;
        self.cohort.geometry = self.geometry;
        self.cohort.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}
