//! Golden fixtures: checked-in inputs, regenerated outputs, checked-in
//! expectations.
//!
//! Each fixture lives in `<root>/<name>/` with `fixture.toml` (its `kind`
//! and an optional absolute `tolerance`), an `inputs/` and an `expected/`
//! directory. Files are compared cell by cell: numerically within the
//! tolerance when both cells parse as numbers and a tolerance is given,
//! textually otherwise.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gazemark_core::aoi::default_layout;
use gazemark_core::geometry::ScreenGeometry;
use gazemark_core::ingest::Label;
use gazemark_core::mainseq::{sample_curve, MainSequenceModel};
use gazemark_core::stats::{independent_t_test, TVariant};
use gazemark_core::synth::{cohort_meta, CohortSpec};
use serde::Deserialize;
use thiserror::Error;

use crate::formats::aoi::write_aoi_csv;
use crate::formats::meta::parse_meta_csv;
use crate::formats::reports::{parse_recall_log, write_curve, write_rspan_scores};
use crate::pipeline;

#[derive(Debug, Error)]
pub enum GoldenError {
    #[error("no fixtures found in {0}")]
    NoFixtures(PathBuf),
    #[error("cannot read fixture directory {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    /// One line per mismatch, or the reason the fixture could not run.
    pub diffs: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    kind: String,
    tolerance: Option<f64>,
}

/// Regenerates and checks every fixture under `root`, in name order.
/// An empty or missing directory is an error rather than a vacuous pass.
pub fn run_golden_suite(root: &Path) -> Result<Vec<Verdict>, GoldenError> {
    let io = |source| GoldenError::Io { path: root.to_path_buf(), source };
    if !root.is_dir() {
        return Err(GoldenError::NoFixtures(root.to_path_buf()));
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root).map_err(io)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(GoldenError::NoFixtures(root.to_path_buf()));
    }
    Ok(dirs.iter().map(|d| run_fixture(d)).collect())
}

pub fn run_fixture(dir: &Path) -> Verdict {
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let diffs = match check(dir) {
        Ok(d) => d,
        Err(e) => vec![format!("error: {e:#}")],
    };
    Verdict { name, passed: diffs.is_empty(), diffs }
}

fn check(dir: &Path) -> anyhow::Result<Vec<String>> {
    let spec: FixtureFile = toml::from_str(&fs::read_to_string(dir.join("fixture.toml"))?)?;
    let inputs = dir.join("inputs");
    let expected = dir.join("expected");
    let produced: BTreeMap<String, String> = match spec.kind.as_str() {
        "rspan" => rspan(&inputs)?,
        "normative_curve" => normative_curve(&inputs)?,
        "aoi_layout" => aoi_layout(&inputs)?,
        "cohort_shape" => cohort_shape(&inputs)?,
        other => anyhow::bail!("unknown fixture kind `{other}`"),
    };
    let mut diffs = Vec::new();
    let mut names: Vec<String> = fs::read_dir(&expected)?.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    if names.is_empty() {
        anyhow::bail!("no expected files in {}", expected.display());
    }
    for n in &names {
        let want = fs::read_to_string(expected.join(n))?;
        match produced.get(n) {
            Some(got) => diffs.extend(compare(n, &want, got, spec.tolerance)),
            None => diffs.push(format!("{n}: not produced")),
        }
    }
    for n in produced.keys().filter(|n| !names.contains(n)) {
        diffs.push(format!("{n}: produced but has no expected file"));
    }
    Ok(diffs)
}

fn compare(file: &str, want: &str, got: &str, tol: Option<f64>) -> Vec<String> {
    let w: Vec<&str> = want.lines().collect();
    let g: Vec<&str> = got.lines().collect();
    let mut out = Vec::new();
    if w.len() != g.len() {
        out.push(format!("{file}: expected {} lines, got {}", w.len(), g.len()));
    }
    for (i, (a, b)) in w.iter().zip(&g).enumerate() {
        let ca: Vec<&str> = a.split(',').collect();
        let cb: Vec<&str> = b.split(',').collect();
        let same = ca.len() == cb.len()
            && ca.iter().zip(&cb).all(|(x, y)| match (tol, x.parse::<f64>(), y.parse::<f64>()) {
                (Some(t), Ok(p), Ok(q)) => (p - q).abs() <= t,
                _ => x == y,
            });
        if !same {
            out.push(format!("{file}:{}: expected `{a}`, got `{b}`", i + 1));
        }
    }
    out
}

fn text<E: std::error::Error + Send + Sync + 'static>(fill: impl FnOnce(&mut Vec<u8>) -> Result<(), E>) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

/// Scores from the recall logs, and the pooled t-test on the scores as
/// tabulated (two decimals).
fn rspan(inputs: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let meta = parse_meta_csv(fs::File::open(inputs.join("participants.csv"))?)?;
    let logs = parse_recall_log(fs::File::open(inputs.join("recall_log.csv"))?)?;
    let summary = pipeline::rspan(&meta, &logs)?;
    let rounded = |l: Label| -> Vec<f64> {
        summary.scores.iter().filter(|(m, _)| m.label == l).map(|(_, r)| format!("{:.2}", r.score).parse().unwrap()).collect()
    };
    let t = independent_t_test(&rounded(Label::NonAdhd), &rounded(Label::Adhd), TVariant::Pooled)?;
    let mut out = BTreeMap::new();
    out.insert("rspan_scores.csv".into(), text(|w| write_rspan_scores(w, &summary.scores))?);
    out.insert("ttest_published.csv".into(), format!("t,df,p_one,p_two\n{},{},{},{}\n", t.t, t.df, t.p_one_tailed, t.p_two_tailed));
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveInput {
    max_amplitude_deg: f64,
    n: usize,
}

fn normative_curve(inputs: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let c: CurveInput = toml::from_str(&fs::read_to_string(inputs.join("curve.toml"))?)?;
    let curve = sample_curve(&MainSequenceModel::NORMATIVE, c.max_amplitude_deg, c.n);
    Ok(BTreeMap::from([("normative_curve.csv".into(), text(|w| write_curve(w, &curve))?)]))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryInput {
    width_px: u32,
    height_px: u32,
    width_cm: f64,
    height_cm: f64,
    viewing_distance_cm: f64,
}

fn aoi_layout(inputs: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let g: GeometryInput = toml::from_str(&fs::read_to_string(inputs.join("geometry.toml"))?)?;
    let geometry = ScreenGeometry {
        width_px: g.width_px,
        height_px: g.height_px,
        width_cm: g.width_cm,
        height_cm: g.height_cm,
        viewing_distance_cm: g.viewing_distance_cm,
    };
    geometry.validate()?;
    let aois = default_layout(&geometry);
    Ok(BTreeMap::from([("aois.csv".into(), text(|w| write_aoi_csv(w, &aois))?)]))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthInput {
    seed: u64,
    n_per_group: usize,
}

fn cohort_shape(inputs: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let s: SynthInput = toml::from_str(&fs::read_to_string(inputs.join("synth.toml"))?)?;
    let spec = CohortSpec { seed: s.seed, n_per_group: s.n_per_group, ..CohortSpec::default() };
    let aois = default_layout(&spec.geometry);
    let cohort = pipeline::synthesize(&spec, &aois)?;
    let adhd = cohort_meta(&spec).iter().filter(|m| m.label == Label::Adhd).count();
    Ok(BTreeMap::from([(
        "summary.csv".into(),
        format!(
            "participants,adhd,non_adhd,stimuli,recordings\n{},{},{},{},{}\n",
            cohort.meta.len(),
            adhd,
            cohort.meta.len() - adhd,
            aois.n_stimuli(),
            cohort.recordings.len()
        ),
    )]))
}
