use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gazemark(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gazemark"));
    c.args(args);
    match threads {
        Some(t) => c.env("GAZEMARK_THREADS", t),
        None => c.env_remove("GAZEMARK_THREADS"),
    };
    c.output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let o = gazemark(args, None);
    assert_eq!(o.status.code(), Some(0), "{args:?}\nstderr: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(root).unwrap().map(|e| e.unwrap()).map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())).collect()
}

fn data_lines(p: &Path) -> usize {
    fs::read_to_string(p).unwrap().lines().count() - 1
}

#[test]
fn synth_writes_a_cohort() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cohort");
    let o = ok(&["synth", "--out", s(&out), "--seed", "7", "--n-per-group", "7"]);
    let listed = String::from_utf8(o.stdout).unwrap();
    assert_eq!(listed.lines().count(), 4);
    assert_eq!(data_lines(&out.join("participants.csv")), 14);
    assert_eq!(data_lines(&out.join("aois.csv")), 126);
    let meta = fs::read_to_string(out.join("participants.csv")).unwrap();
    assert_eq!(meta.matches(",ADHD").count(), 7);
    assert_eq!(meta.matches(",NonADHD").count(), 7);
    let gaze = fs::read_to_string(out.join("gaze.csv")).unwrap();
    let recordings: std::collections::BTreeSet<(&str, &str)> =
        gaze.lines().skip(1).map(|l| { let mut f = l.split(','); (f.next().unwrap(), f.next().unwrap()) }).collect();
    assert_eq!(recordings.len(), 14 * 42);
}

#[test]
fn help_and_bad_flags() {
    let o = gazemark(&["--help"], None);
    assert_eq!(o.status.code(), Some(0));
    let help = String::from_utf8(gazemark(&["pipeline", "--help"], None).stdout).unwrap();
    for flag in ["--config", "--out", "--seed", "--gaze", "--meta", "--feature-set", "--classifiers", "--k", "--grid-search"] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
    assert_eq!(gazemark(&["synth", "--bogus"], None).status.code(), Some(1));
    assert_eq!(gazemark(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(gazemark(&[], None).status.code(), Some(1));
    assert_eq!(gazemark(&["synth", "--seed", "x"], None).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    // missing input file, missing --out, bad feature set, bad thread count, unknown config key
    assert_eq!(gazemark(&["detect", "--out", s(&out), "--gaze", "/nonexistent.csv"], None).status.code(), Some(1));
    assert_eq!(gazemark(&["synth", "--n-per-group", "2"], None).status.code(), Some(1));
    let log = fixture("table1_rspan/inputs/recall_log.csv");
    assert_eq!(gazemark(&["report", "--out", s(&out), "--recall-log", s(&log)], None).status.code(), Some(1));
    assert_eq!(gazemark(&["synth", "--out", s(&out), "--threads-are-env"], None).status.code(), Some(1));
    assert_eq!(gazemark(&["synth", "--out", s(&out), "--n-per-group", "1"], Some("zero")).status.code(), Some(1));
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "seed = 3\ncolour = \"blue\"\n").unwrap();
    assert_eq!(gazemark(&["synth", "--config", s(&cfg), "--out", s(&out)], None).status.code(), Some(1));
    fs::write(&cfg, "k = 1\n").unwrap();
    assert_eq!(gazemark(&["synth", "--config", s(&cfg), "--out", s(&out)], None).status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn single_class_table_is_a_data_error_and_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("features_fixation_sentence.csv");
    let mut text = String::from("participant_id,instance_id,fix_count,label\n");
    for i in 0..12 {
        text += &format!("P{i:02},P{i:02}/S01,{},NonADHD\n", i + 3);
    }
    fs::write(&table, text).unwrap();
    let out = dir.path().join("reports");
    let o = gazemark(&["classify", "--out", s(&out), "--table", s(&table), "--classifiers", "logistic"], None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("class ADHD has 0 instances, fewer than k = 10"), "{err}");
    assert!(!out.exists(), "output directory should be removed");
}

#[test]
fn failed_run_removes_partial_outputs_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("keep.txt"), "mine").unwrap();
    // the cohort is written before classification fails on k > class size
    let o = gazemark(&["pipeline", "--out", s(&out), "--n-per-group", "2", "--k", "3", "--feature-set", "fixation", "--granularity", "participant", "--classifiers", "logistic"], None);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(tree(&out).into_keys().collect::<Vec<_>>(), vec!["keep.txt".to_string()]);
}

#[test]
fn unknown_gaze_participant_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = dir.path().join("c");
    ok(&["synth", "--out", s(&cohort), "--n-per-group", "1"]);
    let meta = dir.path().join("meta.csv");
    let text = fs::read_to_string(cohort.join("participants.csv")).unwrap();
    fs::write(&meta, text.lines().take(2).collect::<Vec<_>>().join("\n") + "\n").unwrap();
    let out = dir.path().join("o");
    let o = gazemark(&["ingest", "--out", s(&out), "--gaze", s(&cohort.join("gaze.csv")), "--meta", s(&meta)], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("P02 is absent from the metadata"));
    assert!(!out.exists());
}

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n);
    ok(&["synth", "--out", s(&d("synth")), "--n-per-group", "3", "--effects", "strong", "--seed", "5"]);
    let gaze = d("synth").join("gaze.csv");
    let meta = d("synth").join("participants.csv");
    ok(&["ingest", "--out", s(&d("ingest")), "--gaze", s(&gaze), "--meta", s(&meta)]);
    assert_eq!(fs::read_to_string(d("ingest").join("ingest_counts.csv")).unwrap().lines().nth(1).unwrap().split(',').nth(2), Some("0"));
    assert!(fs::read_to_string(d("ingest").join("gaze_clean.csv")).unwrap().starts_with(
        "participant_id,stimulus_id,t_ms,x_px,y_px,pupil_left_mm,pupil_right_mm,valid_left,valid_right,interpolated\n"
    ));
    ok(&["detect", "--out", s(&d("detect")), "--gaze", s(&gaze)]);
    let events = d("detect").join("events.csv");
    assert!(data_lines(&events) > 1000);
    ok(&["mainseq", "--out", s(&d("mainseq")), "--events", s(&events), "--meta", s(&meta)]);
    let report = fs::read_to_string(d("mainseq").join("mainseq_report.csv")).unwrap();
    assert_eq!(report.lines().count(), 4, "{report}");
    assert_eq!(data_lines(&d("mainseq").join("normative_curve.csv")), 201);
    ok(&["features", "--out", s(&d("features")), "--events", s(&events), "--meta", s(&meta), "--feature-set", "fixation,aoi-sentence"]);
    let files: Vec<String> = tree(&d("features")).into_keys().collect();
    assert_eq!(files, ["features_aoi-sentence_sentence.arff", "features_aoi-sentence_sentence.csv", "features_fixation_sentence.arff", "features_fixation_sentence.csv"]);
    let arff = d("features").join("features_aoi-sentence_sentence.arff");
    ok(&["classify", "--out", s(&d("classify")), "--table", s(&arff), "--classifiers", "random_forest,logistic", "--k", "5"]);
    let rep = fs::read_to_string(d("classify").join("report_aoi-sentence.csv")).unwrap();
    assert_eq!(rep.lines().next().unwrap(), "classifier,Precision,Recall,F1,Accuracy,AUC");
    assert_eq!(rep.lines().count(), 3);
    assert!(d("classify").join("roc_aoi-sentence_random_forest.csv").is_file());
    // the same table as CSV gives the same report
    let csv = d("features").join("features_aoi-sentence_sentence.csv");
    ok(&["classify", "--out", s(&d("classify_csv")), "--table", s(&csv), "--classifiers", "random_forest,logistic", "--k", "5"]);
    assert_eq!(tree(&d("classify")), tree(&d("classify_csv")));
}

#[test]
fn grid_search_writes_the_selection() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n);
    ok(&["synth", "--out", s(&d("synth")), "--n-per-group", "3", "--effects", "strong"]);
    ok(&["detect", "--out", s(&d("det")), "--gaze", s(&d("synth").join("gaze.csv"))]);
    ok(&["features", "--out", s(&d("f")), "--events", s(&d("det").join("events.csv")), "--meta", s(&d("synth").join("participants.csv")), "--feature-set", "saccade"]);
    ok(&["classify", "--out", s(&d("c")), "--table", s(&d("f").join("features_saccade_sentence.csv")), "--classifiers", "tree_c45_like,instance_knn", "--k", "3", "--grid-search"]);
    let sel = fs::read_to_string(d("c").join("selected_saccade.csv")).unwrap();
    assert_eq!(sel.lines().count(), 3, "{sel}");
    assert!(sel.lines().nth(1).unwrap().starts_with("tree_c45_like,"));
}

#[test]
fn report_reproduces_the_rspan_test() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = ok(&[
        "report",
        "--out",
        s(&out),
        "--recall-log",
        s(&fixture("table1_rspan/inputs/recall_log.csv")),
        "--meta",
        s(&fixture("table1_rspan/inputs/participants.csv")),
    ]);
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("t(12) = 1.54"));
    assert_eq!(fs::read(out.join("rspan_scores.csv")).unwrap(), fs::read(fixture("table1_rspan/expected/rspan_scores.csv")).unwrap());
    let tt = fs::read_to_string(out.join("ttest.csv")).unwrap();
    assert_eq!(tt.lines().count(), 3, "{tt}");
}

const SMALL: &str = r#"
seed = 13
k = 3
feature_sets = ["fixation", "aoi-sentence"]
classifiers = ["random_forest", "logistic", "instance_knn"]

[synth]
n_per_group = 3
effects = "strong"

[grids.random_forest]
n_trees = [10.0]
"#;

#[test]
fn pipeline_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = gazemark(&["pipeline", "--config", s(&cfg), "--out", s(&out)], Some(threads));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        tree(&out)
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "3");
    assert!(a.len() > 20);
    assert!(a.contains_key("report_aoi-sentence.csv") && a.contains_key("events.csv") && a.contains_key("truth_events.csv"));
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn config_paths_resolve_against_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n);
    ok(&["synth", "--out", s(&d("data")), "--n-per-group", "1"]);
    fs::write(d("data/detect.toml"), "out = \"../det\"\n[inputs]\ngaze = \"gaze.csv\"\n[detector]\nvelocity_threshold_dps = 40.0\n").unwrap();
    ok(&["detect", "--config", s(&d("data/detect.toml"))]);
    let at40 = fs::read(d("det/events.csv")).unwrap();
    ok(&["detect", "--config", s(&d("data/detect.toml")), "--out", s(&d("det30")), "--threshold", "30"]);
    assert_ne!(fs::read(d("det30/events.csv")).unwrap(), at40);
}
