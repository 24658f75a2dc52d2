//! Blink detection over a combined per-frame series.
//!
//! Two detectors run over the same series and their events are fused:
//!
//! - **Openness hysteresis.** A blink begins at the first frame whose
//!   eye-openness probability falls below `start_threshold` (default 0.75)
//!   and ends at the frame before openness rises above `end_threshold`
//!   (default 0.98). It is complete when the minimum openness inside the
//!   event drops below `complete_threshold` (default 0.25), partial
//!   otherwise. All comparisons are strict, so boundary-equal values never
//!   trigger a transition.
//! - **Normalized EAR.** The eye aspect ratio is divided by a per-trace
//!   open-eye baseline (a high percentile of the series) and run through
//!   the same hysteresis shape with ratio thresholds. EAR is more
//!   sensitive to partial closures, so its events are always labelled
//!   partial; completeness authority stays with the openness scale.
//!
//! Fusion merges events whose intervals overlap or sit within
//! `fusion_merge_gap_frames` of each other, so one physiological blink
//! seen slightly offset by the two channels is counted once.
//!
//! Traces are processed per segment: a discontinuity in frame indices
//! (left by gap splitting during normalization) resets the state machines
//! and is never bridged by an event.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Completeness, SignalTrace};

/// Minimum number of positive-EAR frames required to estimate a baseline.
pub const MIN_EAR_BASELINE_FRAMES: usize = 10;

/// How the two eyes are reduced to one per-frame value (same policy for
/// openness and EAR).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EyePolicy {
    /// Closure-dominant eye drives detection.
    Min,
    Left,
    Right,
    Mean,
}

impl EyePolicy {
    fn apply(&self, right: f64, left: f64) -> f64 {
        match self {
            EyePolicy::Min => right.min(left),
            EyePolicy::Left => left,
            EyePolicy::Right => right,
            EyePolicy::Mean => (right + left) / 2.0,
        }
    }
}

/// Detector thresholds and switches. Loadable from JSON with exactly these
/// field names; absent fields take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Openness below this starts a blink.
    pub start_threshold: f64,
    /// Minimum openness below this classifies the blink as complete.
    pub complete_threshold: f64,
    /// Openness above this ends a blink.
    pub end_threshold: f64,
    pub eye_policy: EyePolicy,
    /// Whether the complementary EAR path runs at all.
    pub ear_enabled: bool,
    /// Percentile (nearest-rank) of per-frame EAR used as the open-eye baseline.
    pub ear_baseline_percentile: f64,
    /// Normalized EAR below this starts an EAR event.
    pub ear_start_ratio: f64,
    /// Normalized EAR at or above this ends an EAR event.
    pub ear_end_ratio: f64,
    /// EAR events shorter than this many frames are discarded as noise.
    pub ear_min_duration_frames: u64,
    /// Events separated by at most this many frames are fused.
    pub fusion_merge_gap_frames: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            start_threshold: 0.75,
            complete_threshold: 0.25,
            end_threshold: 0.98,
            eye_policy: EyePolicy::Min,
            ear_enabled: true,
            ear_baseline_percentile: 90.0,
            ear_start_ratio: 0.85,
            ear_end_ratio: 0.95,
            ear_min_duration_frames: 2,
            fusion_merge_gap_frames: 1,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let err = |msg: String| Err(DetectorError::InvalidConfig(msg));
        if !(self.complete_threshold > 0.0
            && self.complete_threshold < self.start_threshold
            && self.start_threshold < self.end_threshold
            && self.end_threshold <= 1.0)
        {
            return err(format!(
                "thresholds must satisfy 0 < complete_threshold < start_threshold < end_threshold <= 1 \
                 (got {}, {}, {})",
                self.complete_threshold, self.start_threshold, self.end_threshold
            ));
        }
        if !(self.ear_start_ratio > 0.0
            && self.ear_start_ratio < self.ear_end_ratio
            && self.ear_end_ratio <= 1.0)
        {
            return err(format!(
                "EAR ratios must satisfy 0 < ear_start_ratio < ear_end_ratio <= 1 (got {}, {})",
                self.ear_start_ratio, self.ear_end_ratio
            ));
        }
        if !(self.ear_baseline_percentile > 50.0 && self.ear_baseline_percentile <= 100.0) {
            return err(format!(
                "ear_baseline_percentile must lie in (50, 100] (got {})",
                self.ear_baseline_percentile
            ));
        }
        Ok(())
    }

    /// Parses a JSON document and validates the invariants.
    pub fn from_json(text: &str) -> Result<Self, DetectorError> {
        let config: DetectorConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("detector config is not valid JSON: {0}")]
    ConfigParse(#[from] serde_json::Error),
    #[error("EAR baseline unusable: {reason}")]
    DegenerateBaseline { reason: String },
}

/// One frame after eye combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedFrame {
    pub frame_index: u64,
    pub openness: f64,
    pub ear: f64,
}

/// Per-frame reduction of a bilateral trace. Segment boundaries are the
/// frame-index discontinuities inherited from normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedSeries {
    pub video_id: String,
    pub frames: Vec<CombinedFrame>,
}

impl CombinedSeries {
    /// Maximal runs of contiguous frame indices.
    pub fn segments(&self) -> impl Iterator<Item = &[CombinedFrame]> {
        SegmentIter { rest: &self.frames }
    }
}

struct SegmentIter<'a> {
    rest: &'a [CombinedFrame],
}

impl<'a> Iterator for SegmentIter<'a> {
    type Item = &'a [CombinedFrame];

    fn next(&mut self) -> Option<Self::Item> {
        if self.rest.is_empty() {
            return None;
        }
        let mut len = 1;
        while len < self.rest.len()
            && self.rest[len].frame_index == self.rest[len - 1].frame_index + 1
        {
            len += 1;
        }
        let (segment, rest) = self.rest.split_at(len);
        self.rest = rest;
        Some(segment)
    }
}

/// Which detection path produced an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventSource {
    Openness,
    Ear,
    Fused,
}

impl EventSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventSource::Openness => "openness",
            EventSource::Ear => "ear",
            EventSource::Fused => "fused",
        }
    }
}

/// A detected blink spanning an inclusive frame interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlinkEvent {
    pub start_frame: u64,
    pub end_frame: u64,
    pub completeness: Completeness,
    /// Minimum combined openness observed inside the event.
    pub min_openness: f64,
    /// Minimum EAR/baseline ratio, when the EAR path saw the event.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_normalized_ear: Option<f64>,
    pub source: EventSource,
    /// True when the trace (or a segment) ended mid-blink.
    pub truncated: bool,
}

/// Result of the full detection pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub events: Vec<BlinkEvent>,
    /// Non-fatal conditions, e.g. a degenerate EAR baseline.
    pub warnings: Vec<String>,
}

/// Reduces both eyes to one openness and one EAR value per frame.
pub fn combine_eyes(trace: &SignalTrace, policy: EyePolicy) -> CombinedSeries {
    CombinedSeries {
        video_id: trace.video_id.clone(),
        frames: trace
            .samples
            .iter()
            .map(|s| CombinedFrame {
                frame_index: s.frame_index,
                openness: policy.apply(s.right_openness, s.left_openness),
                ear: policy.apply(s.right_ear, s.left_ear),
            })
            .collect(),
    }
}

/// Runs the openness hysteresis state machine per segment.
pub fn detect_openness_blinks(series: &CombinedSeries, config: &DetectorConfig) -> Vec<BlinkEvent> {
    let mut events = Vec::new();
    for segment in series.segments() {
        let mut active: Option<(u64, f64)> = None; // (start_frame, min_openness)
        for (i, frame) in segment.iter().enumerate() {
            match active {
                None => {
                    if frame.openness < config.start_threshold {
                        active = Some((frame.frame_index, frame.openness));
                    }
                }
                Some((start_frame, min_openness)) => {
                    if frame.openness > config.end_threshold {
                        events.push(openness_event(
                            start_frame,
                            segment[i - 1].frame_index,
                            min_openness,
                            false,
                            config,
                        ));
                        active = None;
                    } else {
                        active = Some((start_frame, min_openness.min(frame.openness)));
                    }
                }
            }
        }
        if let Some((start_frame, min_openness)) = active {
            let last = segment.last().expect("segments are non-empty");
            events.push(openness_event(
                start_frame,
                last.frame_index,
                min_openness,
                true,
                config,
            ));
        }
    }
    events
}

fn openness_event(
    start_frame: u64,
    end_frame: u64,
    min_openness: f64,
    truncated: bool,
    config: &DetectorConfig,
) -> BlinkEvent {
    let completeness = if min_openness < config.complete_threshold {
        Completeness::Complete
    } else {
        Completeness::Partial
    };
    BlinkEvent {
        start_frame,
        end_frame,
        completeness,
        min_openness,
        min_normalized_ear: None,
        source: EventSource::Openness,
        truncated,
    }
}

/// Open-eye EAR estimate: the `ear_baseline_percentile`-th percentile
/// (nearest-rank) of the per-frame EAR values.
pub fn ear_baseline(
    series: &CombinedSeries,
    config: &DetectorConfig,
) -> Result<f64, DetectorError> {
    let positive = series.frames.iter().filter(|f| f.ear > 0.0).count();
    if positive < MIN_EAR_BASELINE_FRAMES {
        return Err(DetectorError::DegenerateBaseline {
            reason: format!(
                "only {positive} frame(s) with positive EAR, need at least {MIN_EAR_BASELINE_FRAMES}"
            ),
        });
    }
    let mut values: Vec<f64> = series.frames.iter().map(|f| f.ear).collect();
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    let rank = ((n as f64) * config.ear_baseline_percentile / 100.0).ceil() as usize;
    let baseline = values[rank.clamp(1, n) - 1];
    if baseline <= 0.0 {
        return Err(DetectorError::DegenerateBaseline {
            reason: format!("baseline percentile is {baseline}, not positive"),
        });
    }
    Ok(baseline)
}

/// Runs the normalized-EAR hysteresis per segment.
///
/// Events shorter than `ear_min_duration_frames` are discarded. All
/// surviving events are partial with `source == Ear`.
pub fn detect_ear_blinks(
    series: &CombinedSeries,
    config: &DetectorConfig,
    baseline: f64,
) -> Vec<BlinkEvent> {
    let mut events = Vec::new();
    for segment in series.segments() {
        // (start_frame, min_normalized_ear, min_openness)
        let mut active: Option<(u64, f64, f64)> = None;
        for (i, frame) in segment.iter().enumerate() {
            let normalized = frame.ear / baseline;
            match active {
                None => {
                    if normalized < config.ear_start_ratio {
                        active = Some((frame.frame_index, normalized, frame.openness));
                    }
                }
                Some((start_frame, min_norm, min_open)) => {
                    if normalized >= config.ear_end_ratio {
                        push_ear_event(
                            &mut events,
                            start_frame,
                            segment[i - 1].frame_index,
                            min_norm,
                            min_open,
                            false,
                            config,
                        );
                        active = None;
                    } else {
                        active = Some((
                            start_frame,
                            min_norm.min(normalized),
                            min_open.min(frame.openness),
                        ));
                    }
                }
            }
        }
        if let Some((start_frame, min_norm, min_open)) = active {
            let last = segment.last().expect("segments are non-empty");
            push_ear_event(
                &mut events,
                start_frame,
                last.frame_index,
                min_norm,
                min_open,
                true,
                config,
            );
        }
    }
    events
}

#[allow(clippy::too_many_arguments)]
fn push_ear_event(
    events: &mut Vec<BlinkEvent>,
    start_frame: u64,
    end_frame: u64,
    min_normalized_ear: f64,
    min_openness: f64,
    truncated: bool,
    config: &DetectorConfig,
) {
    if end_frame - start_frame + 1 < config.ear_min_duration_frames {
        return;
    }
    events.push(BlinkEvent {
        start_frame,
        end_frame,
        completeness: Completeness::Partial,
        min_openness,
        min_normalized_ear: Some(min_normalized_ear),
        source: EventSource::Ear,
        truncated,
    });
}

/// Interval union of the two event streams.
///
/// Events whose ranges overlap or are separated by at most
/// `fusion_merge_gap_frames` merge into one event spanning min start to
/// max end. A merged event is complete iff any openness-source constituent
/// is complete, and carries `source == Fused`; unmerged events keep their
/// original source.
pub fn fuse_events(
    openness_events: &[BlinkEvent],
    ear_events: &[BlinkEvent],
    config: &DetectorConfig,
) -> Vec<BlinkEvent> {
    let mut all: Vec<&BlinkEvent> = openness_events.iter().chain(ear_events.iter()).collect();
    all.sort_by_key(|e| (e.start_frame, e.end_frame));

    let mut fused = Vec::new();
    let mut group: Vec<&BlinkEvent> = Vec::new();
    let mut group_end = 0u64;
    for event in all {
        if !group.is_empty() && event.start_frame <= group_end + 1 + config.fusion_merge_gap_frames
        {
            group_end = group_end.max(event.end_frame);
            group.push(event);
        } else {
            if !group.is_empty() {
                fused.push(merge_group(&group, group_end));
            }
            group_end = event.end_frame;
            group = vec![event];
        }
    }
    if !group.is_empty() {
        fused.push(merge_group(&group, group_end));
    }
    fused
}

fn merge_group(group: &[&BlinkEvent], group_end: u64) -> BlinkEvent {
    if group.len() == 1 {
        return group[0].clone();
    }
    let complete = group
        .iter()
        .any(|e| e.source == EventSource::Openness && e.completeness == Completeness::Complete);
    let min_openness = group
        .iter()
        .map(|e| e.min_openness)
        .fold(f64::INFINITY, f64::min);
    let min_normalized_ear = group
        .iter()
        .filter_map(|e| e.min_normalized_ear)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        });
    BlinkEvent {
        start_frame: group[0].start_frame,
        end_frame: group_end,
        completeness: if complete {
            Completeness::Complete
        } else {
            Completeness::Partial
        },
        min_openness,
        min_normalized_ear,
        source: EventSource::Fused,
        truncated: group.iter().any(|e| e.truncated),
    }
}

/// Full pipeline: combine eyes, detect on openness, optionally detect on
/// normalized EAR and fuse. A degenerate EAR baseline downgrades to
/// openness-only detection and is reported as a warning.
pub fn detect(trace: &SignalTrace, config: &DetectorConfig) -> Detection {
    let series = combine_eyes(trace, config.eye_policy);
    let openness_events = detect_openness_blinks(&series, config);
    if !config.ear_enabled {
        return Detection {
            events: openness_events,
            warnings: Vec::new(),
        };
    }
    match ear_baseline(&series, config) {
        Ok(baseline) => {
            let ear_events = detect_ear_blinks(&series, config, baseline);
            Detection {
                events: fuse_events(&openness_events, &ear_events, config),
                warnings: Vec::new(),
            }
        }
        Err(err) => Detection {
            events: openness_events,
            warnings: vec![format!("{err}; falling back to openness-only detection")],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_trace_csv;
    use proptest::prelude::*;

    const REFERENCE_CSV: &str = include_str!("../tests/data/clinic07_frames30_45.csv");

    fn series_of(frames: &[(u64, f64, f64)]) -> CombinedSeries {
        CombinedSeries {
            video_id: "t".into(),
            frames: frames
                .iter()
                .map(|&(frame_index, openness, ear)| CombinedFrame {
                    frame_index,
                    openness,
                    ear,
                })
                .collect(),
        }
    }

    fn flat_series(n: u64, openness: f64, ear: f64) -> CombinedSeries {
        series_of(&(0..n).map(|f| (f, openness, ear)).collect::<Vec<_>>())
    }

    #[test]
    fn combine_min_takes_closure_dominant_eye() {
        let trace = parse_trace_csv(REFERENCE_CSV, "clinic-07").unwrap();
        let series = combine_eyes(&trace, EyePolicy::Min);
        let f35 = series.frames.iter().find(|f| f.frame_index == 35).unwrap();
        assert_eq!(f35.openness, 0.691);
    }

    #[test]
    fn combine_mean_averages_eyes() {
        let trace = parse_trace_csv(REFERENCE_CSV, "clinic-07").unwrap();
        let series = combine_eyes(&trace, EyePolicy::Mean);
        let f35 = series.frames.iter().find(|f| f.frame_index == 35).unwrap();
        assert!((f35.openness - 0.842).abs() < 1e-12);
    }

    #[test]
    fn combine_is_policy_independent_when_eyes_agree() {
        let trace = crate::ingest::SignalTrace {
            video_id: "t".into(),
            samples: vec![crate::ingest::FrameSample {
                frame_index: 0,
                right_openness: 0.4,
                left_openness: 0.4,
                right_ear: 0.21,
                left_ear: 0.21,
            }],
            fps: None,
        };
        for policy in [
            EyePolicy::Min,
            EyePolicy::Left,
            EyePolicy::Right,
            EyePolicy::Mean,
        ] {
            let series = combine_eyes(&trace, policy);
            assert_eq!(series.frames[0].openness, 0.4);
            assert_eq!(series.frames[0].ear, 0.21);
        }
    }

    #[test]
    fn openness_detects_reference_complete_blink() {
        let trace = parse_trace_csv(REFERENCE_CSV, "clinic-07").unwrap();
        let series = combine_eyes(&trace, EyePolicy::Min);
        let events = detect_openness_blinks(&series, &DetectorConfig::default());
        assert_eq!(events.len(), 1);
        let e = &events[0];
        assert_eq!((e.start_frame, e.end_frame), (35, 38));
        assert_eq!(e.completeness, Completeness::Complete);
        assert_eq!(e.min_openness, 0.001);
        assert_eq!(e.source, EventSource::Openness);
        assert!(!e.truncated);
    }

    #[test]
    fn constant_open_series_yields_nothing() {
        let events =
            detect_openness_blinks(&flat_series(100, 1.0, 0.33), &DetectorConfig::default());
        assert!(events.is_empty());
    }

    #[test]
    fn shallow_dip_is_partial() {
        let mut frames: Vec<(u64, f64, f64)> = (0..20).map(|f| (f, 1.0, 0.33)).collect();
        for frame in &mut frames[8..11] {
            frame.1 = 0.50;
        }
        let events = detect_openness_blinks(&series_of(&frames), &DetectorConfig::default());
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].completeness, Completeness::Partial);
        assert_eq!((events[0].start_frame, events[0].end_frame), (8, 10));
    }

    #[test]
    fn trace_starting_below_start_threshold_opens_event_at_first_frame() {
        let frames = [(5u64, 0.4, 0.3), (6, 0.5, 0.3), (7, 0.99, 0.3)];
        let events = detect_openness_blinks(&series_of(&frames), &DetectorConfig::default());
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].start_frame, 5);
        assert_eq!(events[0].end_frame, 6);
        assert!(!events[0].truncated);
    }

    #[test]
    fn trace_ending_mid_blink_is_truncated() {
        let frames = [(0u64, 1.0, 0.3), (1, 0.3, 0.3), (2, 0.1, 0.3)];
        let events = detect_openness_blinks(&series_of(&frames), &DetectorConfig::default());
        assert_eq!(events.len(), 1);
        assert!(events[0].truncated);
        assert_eq!(events[0].end_frame, 2);
        assert_eq!(events[0].completeness, Completeness::Complete);
    }

    #[test]
    fn boundary_equal_values_do_not_transition() {
        // Exactly the start threshold never begins a blink.
        let at_start = [(0u64, 0.75, 0.3), (1, 0.75, 0.3)];
        assert!(
            detect_openness_blinks(&series_of(&at_start), &DetectorConfig::default()).is_empty()
        );
        // Exactly the end threshold does not end one.
        let at_end = [(0u64, 0.5, 0.3), (1, 0.98, 0.3), (2, 0.99, 0.3)];
        let events = detect_openness_blinks(&series_of(&at_end), &DetectorConfig::default());
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].end_frame, 1);
        // Minimum exactly at the complete threshold stays partial.
        let at_complete = [(0u64, 0.25, 0.3), (1, 0.99, 0.3)];
        let events = detect_openness_blinks(&series_of(&at_complete), &DetectorConfig::default());
        assert_eq!(events[0].completeness, Completeness::Partial);
    }

    #[test]
    fn segment_boundary_resets_state_machine() {
        // Blink in progress when the segment ends; a second segment follows.
        let frames = [
            (0u64, 1.0, 0.3),
            (1, 0.3, 0.3),
            // gap: frames 2-9 missing
            (10, 0.3, 0.3),
            (11, 1.0, 0.3),
        ];
        let events = detect_openness_blinks(&series_of(&frames), &DetectorConfig::default());
        assert_eq!(events.len(), 2);
        assert!(events[0].truncated);
        assert_eq!((events[0].start_frame, events[0].end_frame), (1, 1));
        assert!(!events[1].truncated);
        assert_eq!((events[1].start_frame, events[1].end_frame), (10, 10));
    }

    #[test]
    fn baseline_is_nearest_rank_percentile() {
        let mut frames: Vec<(u64, f64, f64)> = (0..9).map(|f| (f, 1.0, 0.30)).collect();
        frames.push((9, 1.0, 0.20));
        let baseline = ear_baseline(&series_of(&frames), &DetectorConfig::default()).unwrap();
        assert_eq!(baseline, 0.30);
    }

    #[test]
    fn baseline_of_constant_series_is_that_constant() {
        let baseline =
            ear_baseline(&flat_series(12, 1.0, 0.33), &DetectorConfig::default()).unwrap();
        assert_eq!(baseline, 0.33);
    }

    #[test]
    fn baseline_degenerate_on_all_zero_ear() {
        let err = ear_baseline(&flat_series(20, 1.0, 0.0), &DetectorConfig::default()).unwrap_err();
        assert!(matches!(err, DetectorError::DegenerateBaseline { .. }));
    }

    #[test]
    fn baseline_degenerate_on_too_few_positive_frames() {
        let err = ear_baseline(&flat_series(9, 1.0, 0.33), &DetectorConfig::default()).unwrap_err();
        assert!(matches!(err, DetectorError::DegenerateBaseline { .. }));
    }

    fn ear_dip_series() -> CombinedSeries {
        let mut frames: Vec<(u64, f64, f64)> = (0..60).map(|f| (f, 0.99, 0.33)).collect();
        for frame in &mut frames[10..13] {
            frame.2 = 0.20;
        }
        series_of(&frames)
    }

    #[test]
    fn ear_detects_partial_blink_missed_by_openness() {
        let config = DetectorConfig::default();
        let series = ear_dip_series();
        assert!(detect_openness_blinks(&series, &config).is_empty());
        let baseline = ear_baseline(&series, &config).unwrap();
        assert_eq!(baseline, 0.33);
        let events = detect_ear_blinks(&series, &config, baseline);
        assert_eq!(events.len(), 1);
        let e = &events[0];
        assert_eq!((e.start_frame, e.end_frame), (10, 12));
        assert_eq!(e.completeness, Completeness::Partial);
        assert_eq!(e.source, EventSource::Ear);
        let min_norm = e.min_normalized_ear.unwrap();
        assert!((min_norm - 0.20 / 0.33).abs() < 1e-12);
    }

    #[test]
    fn constant_ear_yields_nothing() {
        let config = DetectorConfig::default();
        let series = flat_series(40, 0.99, 0.33);
        let baseline = ear_baseline(&series, &config).unwrap();
        assert!(detect_ear_blinks(&series, &config, baseline).is_empty());
    }

    #[test]
    fn single_frame_ear_dip_is_discarded_by_duration_guard() {
        let config = DetectorConfig::default();
        let mut frames: Vec<(u64, f64, f64)> = (0..40).map(|f| (f, 0.99, 0.33)).collect();
        frames[20].2 = 0.20;
        let series = series_of(&frames);
        let baseline = ear_baseline(&series, &config).unwrap();
        assert!(detect_ear_blinks(&series, &config, baseline).is_empty());
    }

    fn event(start: u64, end: u64, completeness: Completeness, source: EventSource) -> BlinkEvent {
        BlinkEvent {
            start_frame: start,
            end_frame: end,
            completeness,
            min_openness: match completeness {
                Completeness::Complete => 0.1,
                Completeness::Partial => 0.5,
            },
            min_normalized_ear: (source == EventSource::Ear).then_some(0.6),
            source,
            truncated: false,
        }
    }

    #[test]
    fn fuse_identity_under_empty_complement() {
        let openness = vec![event(35, 38, Completeness::Complete, EventSource::Openness)];
        let fused = fuse_events(&openness, &[], &DetectorConfig::default());
        assert_eq!(fused, openness);
    }

    #[test]
    fn fuse_keeps_ear_only_survivor() {
        let ear = vec![event(10, 12, Completeness::Partial, EventSource::Ear)];
        let fused = fuse_events(&[], &ear, &DetectorConfig::default());
        assert_eq!(fused, ear);
    }

    #[test]
    fn fuse_merges_overlap_and_takes_openness_completeness() {
        let openness = vec![event(35, 38, Completeness::Complete, EventSource::Openness)];
        let ear = vec![event(37, 40, Completeness::Partial, EventSource::Ear)];
        let fused = fuse_events(&openness, &ear, &DetectorConfig::default());
        assert_eq!(fused.len(), 1);
        let e = &fused[0];
        assert_eq!((e.start_frame, e.end_frame), (35, 40));
        assert_eq!(e.completeness, Completeness::Complete);
        assert_eq!(e.source, EventSource::Fused);
        assert_eq!(e.min_openness, 0.1);
        assert_eq!(e.min_normalized_ear, Some(0.6));
    }

    #[test]
    fn fuse_bridges_gaps_up_to_merge_limit() {
        let config = DetectorConfig::default(); // merge gap 1
        let a = vec![event(10, 12, Completeness::Partial, EventSource::Openness)];
        let b = vec![event(14, 16, Completeness::Partial, EventSource::Ear)];
        assert_eq!(fuse_events(&a, &b, &config).len(), 1);
        let c = vec![event(15, 16, Completeness::Partial, EventSource::Ear)];
        assert_eq!(fuse_events(&a, &c, &config).len(), 2);
    }

    #[test]
    fn detect_reference_fragment_fuses_both_channels() {
        let trace = parse_trace_csv(REFERENCE_CSV, "clinic-07").unwrap();
        let detection = detect(&trace, &DetectorConfig::default());
        assert!(detection.warnings.is_empty());
        assert_eq!(detection.events.len(), 1);
        let e = &detection.events[0];
        // EAR recovers more slowly than openness here, so fusion extends the
        // event past the openness interval (35, 38).
        assert_eq!((e.start_frame, e.end_frame), (35, 41));
        assert_eq!(e.completeness, Completeness::Complete);
        assert_eq!(e.source, EventSource::Fused);
        assert_eq!(e.min_openness, 0.001);
        assert!(!e.truncated);
    }

    #[test]
    fn detect_reference_fragment_openness_only() {
        let trace = parse_trace_csv(REFERENCE_CSV, "clinic-07").unwrap();
        let config = DetectorConfig {
            ear_enabled: false,
            ..DetectorConfig::default()
        };
        let detection = detect(&trace, &config);
        assert_eq!(detection.events.len(), 1);
        let e = &detection.events[0];
        assert_eq!((e.start_frame, e.end_frame), (35, 38));
        assert_eq!(e.source, EventSource::Openness);
    }

    #[test]
    fn detect_empty_trace_is_empty() {
        let trace = crate::ingest::SignalTrace {
            video_id: "t".into(),
            samples: vec![],
            fps: None,
        };
        let detection = detect(&trace, &DetectorConfig::default());
        assert!(detection.events.is_empty());
    }

    #[test]
    fn detect_falls_back_to_openness_on_degenerate_baseline() {
        let trace = crate::ingest::SignalTrace {
            video_id: "t".into(),
            samples: (0..30)
                .map(|f| crate::ingest::FrameSample {
                    frame_index: f,
                    right_openness: if (10..13).contains(&f) { 0.1 } else { 1.0 },
                    left_openness: if (10..13).contains(&f) { 0.1 } else { 1.0 },
                    right_ear: 0.0,
                    left_ear: 0.0,
                })
                .collect(),
            fps: None,
        };
        let detection = detect(&trace, &DetectorConfig::default());
        assert_eq!(detection.warnings.len(), 1);
        assert!(detection.warnings[0].contains("EAR baseline"));
        assert_eq!(detection.events.len(), 1);
        assert_eq!(detection.events[0].source, EventSource::Openness);
    }

    #[test]
    fn config_json_defaults_and_overrides() {
        let config = DetectorConfig::from_json("{}").unwrap();
        assert_eq!(config, DetectorConfig::default());

        let config =
            DetectorConfig::from_json(r#"{"start_threshold": 0.8, "eye_policy": "mean"}"#).unwrap();
        assert_eq!(config.start_threshold, 0.8);
        assert_eq!(config.eye_policy, EyePolicy::Mean);
        assert_eq!(config.end_threshold, 0.98);

        assert!(DetectorConfig::from_json(r#"{"start_threshold": 0.99}"#).is_err());
        assert!(DetectorConfig::from_json(r#"{"no_such_field": 1}"#).is_err());
    }

    // ── Property tests ──────────────────────────────────────────────

    fn arb_series() -> impl Strategy<Value = CombinedSeries> {
        (
            proptest::collection::vec((0.0f64..=1.0, 0.0f64..=2.0, 0u64..3), 0..120),
            0u64..50,
        )
            .prop_map(|(rows, start)| {
                let mut frame = start;
                let frames = rows
                    .into_iter()
                    .map(|(openness, ear, jump)| {
                        frame += 1 + jump * 7; // jump > 0 introduces a segment boundary
                        CombinedFrame {
                            frame_index: frame,
                            openness,
                            ear,
                        }
                    })
                    .collect();
                CombinedSeries {
                    video_id: "p".into(),
                    frames,
                }
            })
    }

    fn openness_at(series: &CombinedSeries, frame: u64) -> Option<f64> {
        series
            .frames
            .iter()
            .find(|f| f.frame_index == frame)
            .map(|f| f.openness)
    }

    proptest! {
        #[test]
        fn hysteresis_invariants_hold(series in arb_series()) {
            let config = DetectorConfig::default();
            let events = detect_openness_blinks(&series, &config);
            for pair in events.windows(2) {
                prop_assert!(pair[0].end_frame < pair[1].start_frame);
            }
            for e in &events {
                prop_assert!(e.start_frame <= e.end_frame);
                let start = openness_at(&series, e.start_frame).unwrap();
                prop_assert!(start < config.start_threshold);
                for f in e.start_frame + 1..e.end_frame {
                    if let Some(v) = openness_at(&series, f) {
                        prop_assert!(v <= config.end_threshold);
                    }
                }
                if !e.truncated {
                    let after = openness_at(&series, e.end_frame + 1).unwrap();
                    prop_assert!(after > config.end_threshold);
                }
                match e.completeness {
                    Completeness::Complete => prop_assert!(e.min_openness < config.complete_threshold),
                    Completeness::Partial => prop_assert!(
                        e.min_openness >= config.complete_threshold
                            && e.min_openness < config.start_threshold
                    ),
                }
            }
        }

        #[test]
        fn raising_start_threshold_never_loses_events(
            series in arb_series(),
            lo in 0.30f64..0.90,
            delta in 0.0f64..0.08,
        ) {
            let base = DetectorConfig { start_threshold: lo, ..DetectorConfig::default() };
            let raised = DetectorConfig { start_threshold: lo + delta, ..DetectorConfig::default() };
            prop_assume!(base.validate().is_ok() && raised.validate().is_ok());
            let n_base = detect_openness_blinks(&series, &base).len();
            let n_raised = detect_openness_blinks(&series, &raised).len();
            prop_assert!(n_raised >= n_base);
        }

        #[test]
        fn fused_output_is_sorted_disjoint_and_covers_union(
            series in arb_series(),
            merge_gap in 0u64..4,
        ) {
            let config = DetectorConfig { fusion_merge_gap_frames: merge_gap, ..DetectorConfig::default() };
            let openness = detect_openness_blinks(&series, &config);
            let ear = match ear_baseline(&series, &config) {
                Ok(b) => detect_ear_blinks(&series, &config, b),
                Err(_) => vec![],
            };
            let fused = fuse_events(&openness, &ear, &config);

            for pair in fused.windows(2) {
                prop_assert!(pair[0].end_frame < pair[1].start_frame);
            }

            // Frame-set equivalence: fused cover == input cover with gaps of
            // <= merge_gap between covered runs closed.
            let max_frame = series.frames.last().map(|f| f.frame_index + 2).unwrap_or(2);
            let len = max_frame as usize + 1;
            let mut input_cov = vec![false; len];
            for e in openness.iter().chain(ear.iter()) {
                for f in e.start_frame..=e.end_frame {
                    input_cov[f as usize] = true;
                }
            }
            let mut expected = input_cov.clone();
            let mut i = 0usize;
            while i < len {
                if !expected[i] {
                    let run_start = i;
                    while i < len && !expected[i] {
                        i += 1;
                    }
                    let bounded = run_start > 0 && i < len;
                    if bounded && (i - run_start) as u64 <= merge_gap {
                        for slot in &mut expected[run_start..i] {
                            *slot = true;
                        }
                    }
                } else {
                    i += 1;
                }
            }
            let mut fused_cov = vec![false; len];
            for e in &fused {
                for f in e.start_frame..=e.end_frame {
                    fused_cov[f as usize] = true;
                }
            }
            prop_assert_eq!(fused_cov, expected);
        }

        #[test]
        fn detect_is_deterministic(series in arb_series()) {
            let trace = crate::ingest::SignalTrace {
                video_id: series.video_id.clone(),
                samples: series
                    .frames
                    .iter()
                    .map(|f| crate::ingest::FrameSample {
                        frame_index: f.frame_index,
                        right_openness: f.openness,
                        left_openness: f.openness,
                        right_ear: f.ear,
                        left_ear: f.ear,
                    })
                    .collect(),
                fps: None,
            };
            let config = DetectorConfig::default();
            prop_assert_eq!(detect(&trace, &config), detect(&trace, &config));
        }
    }
}
