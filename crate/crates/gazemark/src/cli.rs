//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, bad config,
//! missing input files), 2 on data errors (malformed or unusable inputs).

use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gazemark_core::aoi::{default_layout, AoiSet};
use gazemark_core::features::{FeatureSet, FeatureTable, Granularity, ParticipantEvents};
use gazemark_core::ingest::{GazeRecording, ParticipantMeta};
use gazemark_core::mainseq::{sample_curve, DeviationReport, MainSequenceModel};
use gazemark_core::ml::Family;

use crate::config::{effects_preset, ConfigFile, Settings};
use crate::formats::aoi::{load_aoi_set, write_aoi_csv};
use crate::formats::events::{join_events, parse_events_csv, write_events_csv};
use crate::formats::gaze::{parse_gaze_csv, write_gaze_csv, GazeParse};
use crate::formats::meta::{parse_meta_csv, write_meta_csv};
use crate::formats::reports::{
    parse_recall_log, write_classification_report, write_curve, write_mainseq_report, write_pairs, write_roc, write_rspan_scores, write_ttest,
};
use crate::formats::table::{parse_table_arff, parse_table_csv, parse_table_stem, table_stem, write_table_arff, write_table_csv};
use crate::outdir::OutputDir;
use crate::pipeline;

pub const THREADS_ENV: &str = "GAZEMARK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gazemark", version, about = "Gaze event detection, main-sequence analysis, feature extraction and ADHD classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; nothing is written outside it.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed for every random choice.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort: gaze, metadata, AOIs and true events.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Participants per group.
        #[arg(long, value_name = "N")]
        n_per_group: Option<usize>,
        /// Group effect preset: none, default or strong.
        #[arg(long, value_name = "PRESET")]
        effects: Option<String>,
    },
    /// Validate a gaze log and repair short dropouts.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        gaze: Option<PathBuf>,
        /// Participant metadata; every gaze participant must be listed.
        #[arg(long, value_name = "PATH")]
        meta: Option<PathBuf>,
    },
    /// Detect fixations and saccades in a gaze log.
    Detect {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        gaze: Option<PathBuf>,
        /// Velocity threshold in deg/s.
        #[arg(long, value_name = "DPS")]
        threshold: Option<f64>,
    },
    /// Compare saccades with the normative main sequence, per group.
    Mainseq {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        events: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        meta: Option<PathBuf>,
    },
    /// Build feature tables from detected events.
    Features {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        events: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        meta: Option<PathBuf>,
        /// AOI file; the built-in layout when absent.
        #[arg(long, value_name = "PATH")]
        aois: Option<PathBuf>,
        /// event, sentence, scene or participant.
        #[arg(long, value_name = "G")]
        granularity: Option<String>,
        /// Comma-separated: fixation, saccade, combined, aoi-scene, aoi-sentence.
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        feature_set: Option<Vec<String>>,
    },
    /// Cross-validate classifiers on a feature table (CSV or ARFF).
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        table: Option<PathBuf>,
        /// Comma-separated classifier families.
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        classifiers: Option<Vec<String>>,
        /// Number of folds.
        #[arg(long, value_name = "N")]
        k: Option<usize>,
        /// Tune each family over its grid.
        #[arg(long)]
        grid_search: bool,
        /// Name used in report file names; taken from the table file name when absent.
        #[arg(long, value_name = "SET")]
        feature_set: Option<String>,
        /// Granularity of a CSV table whose file name does not say.
        #[arg(long, value_name = "G")]
        granularity: Option<String>,
    },
    /// Score reading-span recall logs and test the group difference.
    Report {
        #[command(flatten)]
        common: Common,
        /// CSV with participant_id,set,presented,recalled_in_order.
        #[arg(long, value_name = "PATH")]
        recall_log: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        meta: Option<PathBuf>,
    },
    /// Run every stage. Without a gaze input a cohort is synthesized.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        gaze: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        meta: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        aois: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        recall_log: Option<PathBuf>,
        #[arg(long, value_name = "G")]
        granularity: Option<String>,
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        feature_set: Option<Vec<String>>,
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        classifiers: Option<Vec<String>>,
        #[arg(long, value_name = "N")]
        k: Option<usize>,
        #[arg(long, value_name = "N")]
        n_per_group: Option<usize>,
        #[arg(long)]
        grid_search: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "data error: {e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to stderr, a summary to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("gazemark: {e}");
            e.exit_code()
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| usage(format!("cannot start worker threads: {e}")))
}

/// Runs a parsed command, returning the files written.
pub fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let pool = thread_pool()?;
    pool.install(|| dispatch(cli.command))
}

fn settings(common: &Common) -> Result<Settings, CliError> {
    let mut s = match &common.config {
        Some(p) => Settings::from_file(ConfigFile::load(p).map_err(|e| usage(e.to_string()))?).map_err(|e| usage(e.to_string()))?,
        None => Settings::default(),
    };
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    if let Some(out) = &common.out {
        s.out = Some(out.clone());
    }
    Ok(s)
}

fn finish(s: &mut Settings) -> Result<OutputDir, CliError> {
    s.validate().map_err(|e| usage(e.to_string()))?;
    let out = s.out.clone().ok_or_else(|| usage("--out is required (or `out` in the config)"))?;
    OutputDir::create(&out).with_context(|| format!("cannot create output directory {}", out.display())).map_err(CliError::Data)
}

fn one<T: std::str::FromStr>(v: &str, what: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| usage(format!("unknown {what} `{v}`")))
}

fn many<T: std::str::FromStr>(v: &[String], what: &str) -> Result<Vec<T>, CliError> {
    crate::config::parse_list(v, what).map_err(|e| usage(e.to_string()))
}

fn require(p: &Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    let p = p.clone().ok_or_else(|| usage(format!("{flag} is required")))?;
    if !p.is_file() {
        return Err(usage(format!("{flag}: no such file {}", p.display())));
    }
    Ok(p)
}

fn open(p: &Path) -> Result<BufReader<File>, CliError> {
    Ok(BufReader::new(File::open(p).with_context(|| format!("cannot open {}", p.display()))?))
}

fn read_gaze(p: &Path, s: &Settings) -> Result<GazeParse, CliError> {
    Ok(parse_gaze_csv(open(p)?, &s.geometry, s.nominal_rate_hz).with_context(|| p.display().to_string())?)
}

fn read_meta(p: &Path) -> Result<Vec<ParticipantMeta>, CliError> {
    Ok(parse_meta_csv(open(p)?).with_context(|| p.display().to_string())?)
}

fn read_aois(p: Option<&Path>, s: &Settings) -> Result<AoiSet, CliError> {
    match p {
        Some(p) => Ok(load_aoi_set(open(p)?, &s.geometry).with_context(|| p.display().to_string())?),
        None => Ok(default_layout(&s.geometry)),
    }
}

fn read_participants(events: &Path, meta: &Path) -> Result<Vec<ParticipantEvents>, CliError> {
    let logs = parse_events_csv(open(events)?).with_context(|| events.display().to_string())?;
    let meta = read_meta(meta)?;
    Ok(join_events(&meta, logs)?)
}

fn check_participants(recordings: &[GazeRecording], meta: &[ParticipantMeta]) -> Result<(), CliError> {
    if let Some(r) = recordings.iter().find(|r| !meta.iter().any(|m| m.id == r.participant_id)) {
        return Err(anyhow::anyhow!("gaze participant {} is absent from the metadata", r.participant_id).into());
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<Vec<PathBuf>, CliError> {
    match cmd {
        Command::Synth { common, n_per_group, effects } => {
            let mut s = settings(&common)?;
            if let Some(n) = n_per_group {
                s.cohort.n_per_group = n;
            }
            if let Some(e) = effects {
                s.cohort.effects = effects_preset(&e).map_err(|e| usage(e.to_string()))?;
            }
            let mut out = finish(&mut s)?;
            let aois = read_aois(s.inputs.aois.as_deref(), &s)?;
            write_cohort(&mut out, &s, &aois)?;
            Ok(out.commit())
        }
        Command::Ingest { common, gaze, meta } => {
            let mut s = settings(&common)?;
            let gaze = require(&gaze.or(s.inputs.gaze.clone()), "--gaze")?;
            let meta = match meta.or(s.inputs.meta.clone()) {
                Some(m) => Some(require(&Some(m), "--meta")?),
                None => None,
            };
            let mut out = finish(&mut s)?;
            let parsed = read_gaze(&gaze, &s)?;
            if let Some(m) = meta {
                check_participants(&parsed.recordings, &read_meta(&m)?)?;
            }
            let cleaned = pipeline::clean(&parsed.recordings, s.max_gap_ms);
            out.write("gaze_clean.csv", |w| write_gaze_csv(w, &cleaned, true))?;
            write_ingest_summary(&mut out, &parsed, &cleaned)?;
            Ok(out.commit())
        }
        Command::Detect { common, gaze, threshold } => {
            let mut s = settings(&common)?;
            if let Some(t) = threshold {
                s.detector.ivt.velocity_threshold_dps = t;
            }
            let gaze = require(&gaze.or(s.inputs.gaze.clone()), "--gaze")?;
            let mut out = finish(&mut s)?;
            let parsed = read_gaze(&gaze, &s)?;
            let det = pipeline::detect(&parsed.recordings, &s)?;
            out.write("events.csv", |w| write_events_csv(w, &det.logs, None))?;
            Ok(out.commit())
        }
        Command::Mainseq { common, events, meta } => {
            let mut s = settings(&common)?;
            let events = require(&events.or(s.inputs.events.clone()), "--events")?;
            let meta = require(&meta.or(s.inputs.meta.clone()), "--meta")?;
            let mut out = finish(&mut s)?;
            let participants = read_participants(&events, &meta)?;
            write_mainseq(&mut out, &pipeline::main_sequence(&participants)?)?;
            Ok(out.commit())
        }
        Command::Features { common, events, meta, aois, granularity, feature_set } => {
            let mut s = settings(&common)?;
            if let Some(g) = granularity {
                s.granularity = one(&g, "granularity")?;
            }
            if let Some(f) = feature_set {
                s.feature_sets = many(&f, "feature set")?;
            }
            let events = require(&events.or(s.inputs.events.clone()), "--events")?;
            let meta = require(&meta.or(s.inputs.meta.clone()), "--meta")?;
            let aois = match aois.or(s.inputs.aois.clone()) {
                Some(a) => Some(require(&Some(a), "--aois")?),
                None => None,
            };
            let mut out = finish(&mut s)?;
            let participants = read_participants(&events, &meta)?;
            let aois = read_aois(aois.as_deref(), &s)?;
            for &set in &s.feature_sets {
                let built = pipeline::features(set, &participants, s.granularity, &aois, &s)?;
                write_table(&mut out, set, &built.table)?;
            }
            Ok(out.commit())
        }
        Command::Classify { common, table, classifiers, k, grid_search, feature_set, granularity } => {
            let mut s = settings(&common)?;
            if let Some(c) = classifiers {
                s.classifiers = many(&c, "classifier")?;
            }
            if let Some(k) = k {
                s.k = k;
            }
            s.grid_search |= grid_search;
            let table = require(&table.or(s.inputs.table.clone()), "--table")?;
            let stem = table.file_stem().and_then(|x| x.to_str()).unwrap_or("table").to_string();
            let from_name = parse_table_stem(&stem);
            let name = match feature_set {
                Some(f) => one::<FeatureSet>(&f, "feature set")?.as_str().to_string(),
                None => from_name.map(|(f, _)| f.as_str().to_string()).unwrap_or(stem.clone()),
            };
            let g: Granularity = match granularity {
                Some(g) => one(&g, "granularity")?,
                None => from_name.map(|(_, g)| g).unwrap_or(Granularity::Sentence),
            };
            let mut out = finish(&mut s)?;
            let is_arff = table.extension().is_some_and(|e| e.eq_ignore_ascii_case("arff"));
            let t = if is_arff { parse_table_arff(open(&table)?) } else { parse_table_csv(open(&table)?, g) }
                .with_context(|| table.display().to_string())?;
            classify_table(&mut out, &name, &t, &s)?;
            Ok(out.commit())
        }
        Command::Report { common, recall_log, meta } => {
            let mut s = settings(&common)?;
            let log = require(&recall_log.or(s.inputs.recall_log.clone()), "--recall-log")?;
            let meta = require(&meta.or(s.inputs.meta.clone()), "--meta")?;
            let mut out = finish(&mut s)?;
            write_rspan(&mut out, &log, &read_meta(&meta)?)?;
            Ok(out.commit())
        }
        Command::Pipeline { common, gaze, meta, aois, recall_log, granularity, feature_set, classifiers, k, n_per_group, grid_search } => {
            let mut s = settings(&common)?;
            let i = &mut s.inputs;
            i.gaze = gaze.or(i.gaze.take());
            i.meta = meta.or(i.meta.take());
            i.aois = aois.or(i.aois.take());
            i.recall_log = recall_log.or(i.recall_log.take());
            if let Some(g) = granularity {
                s.granularity = one(&g, "granularity")?;
            }
            if let Some(f) = feature_set {
                s.feature_sets = many(&f, "feature set")?;
            }
            if let Some(c) = classifiers {
                s.classifiers = many(&c, "classifier")?;
            }
            if let Some(k) = k {
                s.k = k;
            }
            if let Some(n) = n_per_group {
                s.cohort.n_per_group = n;
            }
            s.grid_search |= grid_search;
            run_pipeline(&mut s)
        }
    }
}

/// Every stage in order, writing into the configured output directory.
pub fn run_pipeline(s: &mut Settings) -> Result<Vec<PathBuf>, CliError> {
    let i = s.inputs.clone();
    let gaze = i.gaze.as_ref().map(|g| require(&Some(g.clone()), "--gaze")).transpose()?;
    let meta_path = match (&gaze, &i.meta) {
        (Some(_), None) => return Err(usage("--meta is required with --gaze")),
        (_, m) => m.as_ref().map(|m| require(&Some(m.clone()), "--meta")).transpose()?,
    };
    let aoi_path = i.aois.as_ref().map(|a| require(&Some(a.clone()), "--aois")).transpose()?;
    let log_path = i.recall_log.as_ref().map(|l| require(&Some(l.clone()), "--recall-log")).transpose()?;
    let mut out = finish(s)?;
    let s = &*s;
    let aois = read_aois(aoi_path.as_deref(), s)?;
    let (recordings, meta, parsed) = match &gaze {
        Some(g) => {
            let parsed = read_gaze(g, s)?;
            let meta = read_meta(meta_path.as_deref().expect("checked above"))?;
            check_participants(&parsed.recordings, &meta)?;
            (parsed.recordings.clone(), meta, Some(parsed))
        }
        None => {
            let cohort = write_cohort(&mut out, s, &aois)?;
            (cohort.recordings, cohort.meta, None)
        }
    };
    if let Some(p) = &parsed {
        write_ingest_summary(&mut out, p, &pipeline::clean(&p.recordings, s.max_gap_ms))?;
    }
    let det = pipeline::detect(&recordings, s)?;
    out.write("events.csv", |w| write_events_csv(w, &det.logs, None))?;
    let participants = join_events(&meta, det.logs)?;
    write_mainseq(&mut out, &pipeline::main_sequence(&participants)?)?;
    for &set in &s.feature_sets {
        let built = pipeline::features(set, &participants, s.granularity, &aois, s).with_context(|| format!("feature set {set}"))?;
        write_table(&mut out, set, &built.table)?;
        classify_table(&mut out, set.as_str(), &built.table, s)?;
    }
    if let Some(l) = log_path {
        write_rspan(&mut out, &l, &meta)?;
    }
    Ok(out.commit())
}

fn write_cohort(out: &mut OutputDir, s: &Settings, aois: &AoiSet) -> Result<gazemark_core::synth::Cohort, CliError> {
    let cohort = pipeline::synthesize(&s.cohort, aois)?;
    out.write("gaze.csv", |w| write_gaze_csv(w, &cohort.recordings, false))?;
    out.write("participants.csv", |w| write_meta_csv(w, &cohort.meta))?;
    out.write("aois.csv", |w| write_aoi_csv(w, aois))?;
    out.write("truth_events.csv", |w| write_events_csv(w, &pipeline::truth_logs(&cohort.truth), Some("truth")))?;
    Ok(cohort)
}

fn write_ingest_summary(out: &mut OutputDir, parsed: &GazeParse, cleaned: &[GazeRecording]) -> Result<(), CliError> {
    let mut text = String::from("participant_id,stimulus_id,samples,valid_before,valid_after,interpolated\n");
    for (r, c) in parsed.recordings.iter().zip(cleaned) {
        let interp = c.samples.iter().filter(|x| x.interpolated).count();
        text += &format!("{},{},{},{},{},{}\n", r.participant_id, r.stimulus_id, r.samples.len(), r.valid_count(), c.valid_count(), interp);
    }
    out.write_str("ingest_summary.csv", &text)?;
    out.write_str("ingest_counts.csv", &format!("rows,accepted,rejected\n{},{},{}\n", parsed.rows, parsed.accepted(), parsed.rejected.len()))?;
    let mut rej = String::from("line,reason\n");
    for r in &parsed.rejected {
        rej += &format!("{},\"{}\"\n", r.line, r.reason.replace('"', "\"\""));
    }
    out.write_str("rejected_rows.csv", &rej)?;
    Ok(())
}

fn write_mainseq(out: &mut OutputDir, reports: &[DeviationReport]) -> Result<(), CliError> {
    out.write("mainseq_report.csv", |w| write_mainseq_report(w, reports))?;
    for r in reports {
        let g = r.group.as_str().to_ascii_lowercase();
        out.write(&format!("mainseq_{g}_velocity.csv"), |w| write_pairs(w, ["amplitude_deg", "peak_velocity_dps"], &r.velocity_points))?;
        out.write(&format!("mainseq_{g}_duration.csv"), |w| write_pairs(w, ["amplitude_deg", "duration_ms"], &r.duration_points))?;
        let max_amp = r.velocity_points.iter().map(|p| p.0).fold(1.0, f64::max);
        out.write(&format!("mainseq_{g}_fitted_curve.csv"), |w| write_curve(w, &sample_curve(&r.fitted.model, max_amp, 101)))?;
    }
    out.write("normative_curve.csv", |w| write_curve(w, &sample_curve(&MainSequenceModel::NORMATIVE, 20.0, 201)))?;
    Ok(())
}

fn write_table(out: &mut OutputDir, set: FeatureSet, t: &FeatureTable) -> Result<(), CliError> {
    let stem = table_stem(set, t.granularity);
    out.write(&format!("{stem}.csv"), |w| write_table_csv(w, t))?;
    out.write(&format!("{stem}.arff"), |w| write_table_arff(w, t, &stem))?;
    Ok(())
}

fn classify_table(out: &mut OutputDir, name: &str, t: &FeatureTable, s: &Settings) -> Result<(), CliError> {
    let data = t.to_dataset().with_context(|| format!("feature set {name}"))?;
    let results = pipeline::classify(&data, &s.classifiers, s.grid_search, &s.grids, s.k, s.seed).with_context(|| format!("classifying {name}"))?;
    let rows: Vec<(Family, _)> = results.iter().map(|r| (r.family, r.report.clone())).collect();
    out.write(&format!("report_{name}.csv"), |w| write_classification_report(w, &rows))?;
    for r in &results {
        out.write(&format!("roc_{name}_{}.csv", r.family), |w| write_roc(w, &r.report.roc_points))?;
    }
    if s.grid_search {
        let mut text = String::from("classifier,setting,evaluated\n");
        for r in &results {
            text += &format!("{},\"{}\",{}\n", r.family, r.spec.label(), r.n_evaluations);
        }
        out.write_str(&format!("selected_{name}.csv"), &text)?;
    }
    Ok(())
}

fn write_rspan(out: &mut OutputDir, log: &Path, meta: &[ParticipantMeta]) -> Result<(), CliError> {
    let logs = parse_recall_log(open(log)?).with_context(|| log.display().to_string())?;
    let summary = pipeline::rspan(meta, &logs)?;
    out.write("rspan_scores.csv", |w| write_rspan_scores(w, &summary.scores))?;
    out.write("ttest.csv", |w| write_ttest(w, "NonADHD", "ADHD", gazemark_core::stats::TVariant::Pooled, &summary.test))?;
    let t = &summary.test;
    eprintln!("t({}) = {:.4}, one-tailed p = {:.4}, two-tailed p = {:.4}", t.df, t.t, t.p_one_tailed, t.p_two_tailed);
    Ok(())
}
