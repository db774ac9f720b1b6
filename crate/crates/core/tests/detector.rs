use gazemark_core::events::{detect_events, DetectorParams, Event};
use gazemark_core::geometry::Point;
use gazemark_core::ingest::{DegreeRecording, DegreeSample};

fn recording(xs: &[f64]) -> DegreeRecording {
    let samples = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| DegreeSample {
            t_ms: i as f64 * 1000.0 / 60.0,
            pos: Point::new(x, 0.0),
            pupil_left_mm: Some(3.5),
            pupil_right_mm: Some(3.5),
            valid: true,
            interpolated: false,
        })
        .collect();
    DegreeRecording { participant_id: "P01".into(), stimulus_id: "S01".into(), samples }
}

fn saccades(r: &DegreeRecording, threshold: f64) -> usize {
    let events = detect_events(r, &DetectorParams::default().with_threshold(threshold)).unwrap();
    events.iter().filter(|e| matches!(e, Event::Saccade(_))).count()
}

/// Two jumps joined by a 36 deg/s drift: at 30 deg/s the drift is part of
/// one long saccade, at 40 deg/s it becomes a fixation long enough to
/// survive the minimum-duration filter, splitting the saccade in two.
/// Velocity thresholding alone does not make the count monotone.
#[test]
fn raising_the_threshold_can_split_a_saccade() {
    let mut xs = vec![0.0; 10];
    xs.extend([2.5, 5.0]);
    xs.extend((1..=6).map(|i| 5.0 + 0.6 * i as f64));
    xs.extend([11.1, 13.6]);
    xs.extend(vec![13.6; 10]);
    let r = recording(&xs);
    assert_eq!(saccades(&r, 30.0), 1);
    assert_eq!(saccades(&r, 40.0), 2);
    assert_eq!(saccades(&r, 100.0), 0);
}

/// Without intermediate plateaus the count only falls as the threshold rises.
#[test]
fn clean_steps_are_monotone() {
    let mut xs = vec![0.0; 12];
    for k in 1..=4 {
        let base = 3.0 * k as f64;
        xs.extend([base - 1.5, base]);
        xs.extend(vec![base; 12]);
    }
    let r = recording(&xs);
    let counts: Vec<usize> = [10.0, 30.0, 60.0, 90.0, 150.0].iter().map(|&t| saccades(&r, t)).collect();
    assert_eq!(counts[0], 4);
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
}
