//! Static rectangular areas of interest per sentence stimulus.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::events::Event;
use crate::geometry::{Point, ScreenGeometry};
use crate::ingest::UnknownCategory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AoiError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("duplicate {kind} rect for stimulus {stimulus}")]
    DuplicateAoi { stimulus: String, kind: AoiKind },
    #[error("{kind} rect for stimulus {stimulus} lies outside the screen")]
    OutOfBounds { stimulus: String, kind: AoiKind },
    #[error("stimulus {0} has no AOIs")]
    UnknownStimulus(String),
}

/// AOI1 is the sentence, AOI2 the critical word, AOI3 the decision letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AoiKind {
    Sentence,
    CriticalWord,
    DecisionLetter,
}

impl AoiKind {
    pub const ALL: [AoiKind; 3] = [AoiKind::Sentence, AoiKind::CriticalWord, AoiKind::DecisionLetter];

    pub fn code(self) -> &'static str {
        match self {
            AoiKind::Sentence => "AOI1",
            AoiKind::CriticalWord => "AOI2",
            AoiKind::DecisionLetter => "AOI3",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AoiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for AoiKind {
    type Err = UnknownCategory;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "AOI1" => Ok(AoiKind::Sentence),
            "AOI2" => Ok(AoiKind::CriticalWord),
            "AOI3" => Ok(AoiKind::DecisionLetter),
            other => Err(UnknownCategory(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoiRect {
    pub stimulus_id: String,
    pub kind: AoiKind,
    pub x_px: f64,
    pub y_px: f64,
    pub w_px: f64,
    pub h_px: f64,
}

impl AoiRect {
    /// Left/top edges inclusive, right/bottom exclusive.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_px && p.x < self.x_px + self.w_px && p.y >= self.y_px && p.y < self.y_px + self.h_px
    }

    pub fn area(&self) -> f64 {
        self.w_px * self.h_px
    }

    pub fn center(&self) -> Point {
        Point::new(self.x_px + self.w_px / 2.0, self.y_px + self.h_px / 2.0)
    }

    fn intersects(&self, o: &AoiRect) -> bool {
        self.x_px < o.x_px + o.w_px && o.x_px < self.x_px + self.w_px && self.y_px < o.y_px + o.h_px && o.y_px < self.y_px + self.h_px
    }
}

/// One AOI record as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiRecord {
    pub scene_id: String,
    pub rect: AoiRect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StimulusAois {
    pub scene_id: String,
    /// Indexed by [`AoiKind::index`].
    pub rects: [AoiRect; 3],
}

impl StimulusAois {
    pub fn rect(&self, kind: AoiKind) -> &AoiRect {
        &self.rects[kind.index()]
    }
}

/// Validated AOIs for every stimulus, plus the scene (sentence set) each
/// stimulus belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiSet {
    stimuli: BTreeMap<String, StimulusAois>,
    /// Scene ids in first-appearance order.
    scene_order: Vec<String>,
}

impl AoiSet {
    /// Validates a flat list of records. Every stimulus needs exactly one
    /// rect of each kind, all on screen, and the word and letter rects must
    /// touch the sentence rect.
    pub fn from_records(records: Vec<AoiRecord>, geometry: &ScreenGeometry) -> Result<Self, AoiError> {
        let mut partial: BTreeMap<String, (String, [Option<AoiRect>; 3])> = BTreeMap::new();
        let mut scene_order: Vec<String> = Vec::new();
        for rec in records {
            let r = rec.rect;
            if !(r.w_px > 0.0 && r.h_px > 0.0) {
                return Err(AoiError::Schema(format!("{} {} has non-positive size", r.stimulus_id, r.kind)));
            }
            let inside = r.x_px >= 0.0
                && r.y_px >= 0.0
                && r.x_px + r.w_px <= geometry.width_px as f64
                && r.y_px + r.h_px <= geometry.height_px as f64;
            if !inside {
                return Err(AoiError::OutOfBounds { stimulus: r.stimulus_id, kind: r.kind });
            }
            if !scene_order.contains(&rec.scene_id) {
                scene_order.push(rec.scene_id.clone());
            }
            let entry = partial
                .entry(r.stimulus_id.clone())
                .or_insert_with(|| (rec.scene_id.clone(), [None, None, None]));
            if entry.0 != rec.scene_id {
                return Err(AoiError::Schema(format!("stimulus {} listed under two scenes", r.stimulus_id)));
            }
            let slot = &mut entry.1[r.kind.index()];
            if slot.is_some() {
                return Err(AoiError::DuplicateAoi { stimulus: r.stimulus_id, kind: r.kind });
            }
            *slot = Some(r);
        }
        if partial.is_empty() {
            return Err(AoiError::Schema("no AOI records".into()));
        }
        let mut stimuli = BTreeMap::new();
        for (id, (scene_id, slots)) in partial {
            let [a, b, c] = slots;
            let missing = |k: AoiKind| AoiError::Schema(format!("stimulus {id} lacks {k}"));
            let rects = [
                a.ok_or_else(|| missing(AoiKind::Sentence))?,
                b.ok_or_else(|| missing(AoiKind::CriticalWord))?,
                c.ok_or_else(|| missing(AoiKind::DecisionLetter))?,
            ];
            for k in [AoiKind::CriticalWord, AoiKind::DecisionLetter] {
                if !rects[k.index()].intersects(&rects[0]) {
                    return Err(AoiError::Schema(format!("stimulus {id}: {k} does not overlap AOI1")));
                }
            }
            stimuli.insert(id, StimulusAois { scene_id, rects });
        }
        Ok(Self { stimuli, scene_order })
    }

    pub fn stimulus(&self, id: &str) -> Option<&StimulusAois> {
        self.stimuli.get(id)
    }

    pub fn stimulus_ids(&self) -> impl Iterator<Item = &str> {
        self.stimuli.keys().map(String::as_str)
    }

    pub fn n_stimuli(&self) -> usize {
        self.stimuli.len()
    }

    pub fn n_rects(&self) -> usize {
        3 * self.stimuli.len()
    }

    pub fn scene_of(&self, stimulus_id: &str) -> Option<&str> {
        self.stimuli.get(stimulus_id).map(|s| s.scene_id.as_str())
    }

    pub fn scenes(&self) -> &[String] {
        &self.scene_order
    }

    /// Stimuli of a scene, in id order.
    pub fn scene_members(&self, scene_id: &str) -> Vec<&str> {
        self.stimuli.iter().filter(|(_, s)| s.scene_id == scene_id).map(|(k, _)| k.as_str()).collect()
    }

    /// All records, sorted by stimulus then kind.
    pub fn records(&self) -> Vec<AoiRecord> {
        self.stimuli
            .values()
            .flat_map(|s| s.rects.iter().map(move |r| AoiRecord { scene_id: s.scene_id.clone(), rect: r.clone() }))
            .collect()
    }
}

/// Returns the rect containing `p`; among overlapping rects the smallest
/// area wins, with kind order breaking exact ties.
pub fn hit_test(p: Point, rects: &[AoiRect]) -> Option<&AoiRect> {
    rects
        .iter()
        .filter(|r| r.contains(p))
        .min_by(|a, b| a.area().total_cmp(&b.area()).then(a.kind.cmp(&b.kind)))
}

/// Which end of a saccade determines its AOI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SaccadeAttribution {
    #[default]
    Landing,
    Launch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedEvent {
    pub event: Event,
    pub aoi: Option<AoiKind>,
}

/// Assigns each event of one stimulus to an AOI: fixations by centroid,
/// saccades by landing (or launch) point. Positions are converted from
/// degrees back to screen pixels.
pub fn map_events_to_aois(
    events: &[Event],
    aois: &AoiSet,
    stimulus_id: &str,
    geometry: &ScreenGeometry,
    attribution: SaccadeAttribution,
) -> Result<Vec<MappedEvent>, AoiError> {
    let stim = aois.stimulus(stimulus_id).ok_or_else(|| AoiError::UnknownStimulus(stimulus_id.into()))?;
    Ok(events
        .iter()
        .map(|e| {
            let deg = match e {
                Event::Fixation(f) => f.centroid_deg,
                Event::Saccade(s) => match attribution {
                    SaccadeAttribution::Landing => s.end_deg,
                    SaccadeAttribution::Launch => s.start_deg,
                },
            };
            let px = geometry.degrees_to_pixels(deg);
            MappedEvent { event: *e, aoi: hit_test(px, &stim.rects).map(|r| r.kind) }
        })
        .collect())
}

/// Word pitch used by the default layout and the reading model.
pub const WORD_PITCH_PX: f64 = 96.0;
/// Sentence-set sizes of the default schedule: three sets each of 2..=5.
pub const DEFAULT_SET_SIZES: [usize; 12] = [3, 5, 2, 4, 4, 2, 5, 3, 5, 3, 2, 4];

/// Default 42-sentence layout: one text line per stimulus, the critical word
/// inside the sentence rect and the decision letter straddling its right end.
pub fn default_layout(geometry: &ScreenGeometry) -> AoiSet {
    let line_y = libm::floor(geometry.height_px as f64 / 2.0 - 24.0);
    let x0 = 140.0;
    let mut records = Vec::new();
    let mut stim = 0usize;
    for (scene_idx, &size) in DEFAULT_SET_SIZES.iter().enumerate() {
        let scene_id = format!("T{:02}", scene_idx + 1);
        for _ in 0..size {
            stim += 1;
            let stimulus_id = format!("S{stim:02}");
            let n_words = 6 + (stim * 7) % 4;
            let width = n_words as f64 * WORD_PITCH_PX;
            let critical = n_words - 1 - stim % 3;
            let rect = |kind, x_px, w_px| AoiRecord {
                scene_id: scene_id.clone(),
                rect: AoiRect { stimulus_id: stimulus_id.clone(), kind, x_px, y_px: line_y, w_px, h_px: 48.0 },
            };
            records.push(rect(AoiKind::Sentence, x0, width));
            records.push(rect(AoiKind::CriticalWord, x0 + critical as f64 * WORD_PITCH_PX + 4.0, WORD_PITCH_PX - 8.0));
            records.push(rect(AoiKind::DecisionLetter, x0 + width - 24.0, 64.0));
        }
    }
    AoiSet::from_records(records, geometry).expect("default layout is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{FixationEvent, SaccadeEvent};
    use alloc::vec;

    fn rect(kind: AoiKind, x: f64, y: f64, w: f64, h: f64) -> AoiRect {
        AoiRect { stimulus_id: "S1".into(), kind, x_px: x, y_px: y, w_px: w, h_px: h }
    }

    fn fixture_rects() -> Vec<AoiRect> {
        vec![
            rect(AoiKind::Sentence, 100.0, 400.0, 600.0, 50.0),
            rect(AoiKind::CriticalWord, 500.0, 400.0, 90.0, 50.0),
            rect(AoiKind::DecisionLetter, 680.0, 400.0, 60.0, 50.0),
        ]
    }

    #[test]
    fn nested_smallest_wins() {
        let r = fixture_rects();
        assert_eq!(hit_test(Point::new(520.0, 420.0), &r).unwrap().kind, AoiKind::CriticalWord);
        assert_eq!(hit_test(Point::new(200.0, 420.0), &r).unwrap().kind, AoiKind::Sentence);
        assert_eq!(hit_test(Point::new(690.0, 420.0), &r).unwrap().kind, AoiKind::DecisionLetter);
        assert_eq!(hit_test(Point::new(730.0, 420.0), &r).unwrap().kind, AoiKind::DecisionLetter);
    }

    #[test]
    fn below_line_misses() {
        // Cluster just under the text line, as in the ADHD heat map.
        let r = fixture_rects();
        for x in [150.0, 300.0, 520.0, 690.0] {
            assert!(hit_test(Point::new(x, 470.0), &r).is_none());
        }
    }

    #[test]
    fn boundary_convention() {
        let r = fixture_rects();
        assert_eq!(hit_test(Point::new(100.0, 400.0), &r).unwrap().kind, AoiKind::Sentence);
        assert!(hit_test(Point::new(99.999, 400.0), &r).is_none());
        assert!(hit_test(Point::new(300.0, 450.0), &r).is_none());
        assert!(hit_test(Point::new(740.0, 420.0), &r).is_none());
    }

    fn recs(rs: Vec<AoiRect>) -> Vec<AoiRecord> {
        rs.into_iter().map(|rect| AoiRecord { scene_id: "T1".into(), rect }).collect()
    }

    #[test]
    fn load_rejects_duplicates_and_out_of_bounds() {
        let g = ScreenGeometry::default();
        let mut rs = fixture_rects();
        rs.push(rect(AoiKind::Sentence, 0.0, 0.0, 10.0, 10.0));
        assert_eq!(
            AoiSet::from_records(recs(rs), &g),
            Err(AoiError::DuplicateAoi { stimulus: "S1".into(), kind: AoiKind::Sentence })
        );
        let mut rs = fixture_rects();
        rs[0].w_px = 1300.0;
        assert!(matches!(AoiSet::from_records(recs(rs), &g), Err(AoiError::OutOfBounds { .. })));
        let rs = fixture_rects()[..2].to_vec();
        assert!(matches!(AoiSet::from_records(recs(rs), &g), Err(AoiError::Schema(_))));
    }

    #[test]
    fn default_layout_shape() {
        let set = default_layout(&ScreenGeometry::default());
        assert_eq!(set.n_stimuli(), 42);
        assert_eq!(set.n_rects(), 126);
        assert_eq!(set.scenes().len(), 12);
        assert_eq!(DEFAULT_SET_SIZES.iter().sum::<usize>(), 42);
        for (i, scene) in set.scenes().iter().enumerate() {
            assert_eq!(set.scene_members(scene).len(), DEFAULT_SET_SIZES[i]);
        }
        // critical word inside sentence
        for id in set.stimulus_ids() {
            let s = set.stimulus(id).unwrap();
            let (a, b) = (s.rect(AoiKind::Sentence), s.rect(AoiKind::CriticalWord));
            assert!(b.x_px >= a.x_px && b.x_px + b.w_px <= a.x_px + a.w_px);
        }
    }

    #[test]
    fn mapping_uses_centroid_and_landing() {
        let g = ScreenGeometry::default();
        let set = AoiSet::from_records(recs(fixture_rects()), &g).unwrap();
        let fix_at = |px: Point| {
            Event::Fixation(FixationEvent {
                start_ms: 0.0,
                end_ms: 100.0,
                duration_ms: 100.0,
                centroid_deg: g.pixels_to_degrees(px),
                dispersion_deg: 0.0,
                mean_pupil_left_mm: None,
                mean_pupil_right_mm: None,
            })
        };
        let sac = Event::Saccade(SaccadeEvent::from_endpoints(
            100.0,
            130.0,
            g.pixels_to_degrees(Point::new(200.0, 420.0)),
            g.pixels_to_degrees(Point::new(700.0, 420.0)),
            200.0,
            150.0,
        ));
        let evs = [fix_at(Point::new(710.0, 425.0)), sac];
        let m = map_events_to_aois(&evs, &set, "S1", &g, SaccadeAttribution::Landing).unwrap();
        assert_eq!(m[0].aoi, Some(AoiKind::DecisionLetter));
        assert_eq!(m[1].aoi, Some(AoiKind::DecisionLetter));
        let m = map_events_to_aois(&evs, &set, "S1", &g, SaccadeAttribution::Launch).unwrap();
        assert_eq!(m[1].aoi, Some(AoiKind::Sentence));
        assert!(map_events_to_aois(&[], &set, "S1", &g, SaccadeAttribution::Landing).unwrap().is_empty());
        assert_eq!(
            map_events_to_aois(&evs, &set, "S9", &g, SaccadeAttribution::Landing),
            Err(AoiError::UnknownStimulus("S9".into()))
        );
    }
}
