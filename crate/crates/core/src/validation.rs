//! Event-level scoring of detections against specialist annotations.
//!
//! All four confusion outcomes are defined over frame ranges, not single
//! frames:
//!
//! - **TP** — a detected event overlapping at least one annotated blink.
//! - **FP** — a detected event overlapping no annotated blink.
//! - **FN** — an annotated blink overlapping no detected event.
//! - **TN** — an open gap (maximal interval of the trace extent not
//!   covered by any detected event) containing no frame of any unmatched
//!   annotated blink. With `tn_strict`, any annotated frame disqualifies
//!   the gap, so boundary jitter of an already-matched blink spilling into
//!   a neighbouring gap erases that gap's TN.
//!
//! Overlap means the inclusive intervals share at least one frame. A
//! detected event overlapping several annotated blinks is one TP, and each
//! blink it covers counts as matched.
//!
//! [`score_events_oracle`] recomputes the same counts by materializing
//! per-frame bitmaps and scanning exhaustively; it exists to cross-check
//! the interval logic and must agree on every input.

use std::iter::Sum;
use std::ops::Add;

use serde::Serialize;
use thiserror::Error;

use crate::detector::BlinkEvent;
use crate::ingest::{AnnotationSet, Completeness};

/// Inclusive frame interval covered by a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrameInterval {
    pub first: u64,
    pub last: u64,
}

impl FrameInterval {
    pub fn new(first: u64, last: u64) -> Result<Self, ValidationError> {
        if first > last {
            return Err(ValidationError::EmptyExtent { first, last });
        }
        Ok(FrameInterval { first, last })
    }

    fn contains(&self, start: u64, end: u64) -> bool {
        self.first <= start && end <= self.last
    }
}

/// Event-level confusion counts for one or more videos.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionCounts {
    #[serde(rename = "tp")]
    pub true_positives: u64,
    #[serde(rename = "fp")]
    pub false_positives: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
    #[serde(rename = "tn")]
    pub true_negatives: u64,
}

impl Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, other: ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            true_positives: self.true_positives + other.true_positives,
            false_positives: self.false_positives + other.false_positives,
            false_negatives: self.false_negatives + other.false_negatives,
            true_negatives: self.true_negatives + other.true_negatives,
        }
    }
}

impl Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = ConfusionCounts>>(iter: I) -> ConfusionCounts {
        iter.fold(ConfusionCounts::default(), Add::add)
    }
}

/// Component-wise sum (micro-averaging): metrics computed from the pooled
/// counts match a single pooled confusion matrix.
pub fn aggregate(per_video: &[ConfusionCounts]) -> ConfusionCounts {
    per_video.iter().copied().sum()
}

/// Audit trail behind a [`ConfusionCounts`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatchDetail {
    pub detected: Vec<DetectedOutcome>,
    pub annotated: Vec<AnnotatedOutcome>,
    pub gaps: Vec<GapOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectedOutcome {
    pub start_frame: u64,
    pub end_frame: u64,
    pub completeness: Completeness,
    /// Indices into `MatchDetail::annotated` of every overlapping blink.
    pub matched_annotations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedOutcome {
    pub start_frame: u64,
    pub end_frame: u64,
    pub completeness: Completeness,
    /// Whether any detected event overlaps this blink.
    pub matched: bool,
}

/// A maximal interval of the extent not covered by any detected event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapOutcome {
    pub start_frame: u64,
    pub end_frame: u64,
    pub true_negative: bool,
}

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("frame interval first {first} exceeds last {last}")]
    EmptyExtent { first: u64, last: u64 },
    #[error("detected event [{start}, {end}] outside trace extent [{first}, {last}]")]
    DetectedOutsideExtent {
        start: u64,
        end: u64,
        first: u64,
        last: u64,
    },
    #[error("annotated blink [{start}, {end}] outside trace extent [{first}, {last}]")]
    AnnotatedOutsideExtent {
        start: u64,
        end: u64,
        first: u64,
        last: u64,
    },
    #[error("detected events not sorted and non-overlapping near [{start}, {end}]")]
    UnsortedDetections { start: u64, end: u64 },
}

fn ranges_overlap(a_start: u64, a_end: u64, b_start: u64, b_end: u64) -> bool {
    a_start <= b_end && b_start <= a_end
}

fn check_inputs(
    detected: &[BlinkEvent],
    annotated: &AnnotationSet,
    extent: FrameInterval,
) -> Result<(), ValidationError> {
    let mut prev_end: Option<u64> = None;
    for event in detected {
        if !extent.contains(event.start_frame, event.end_frame) {
            return Err(ValidationError::DetectedOutsideExtent {
                start: event.start_frame,
                end: event.end_frame,
                first: extent.first,
                last: extent.last,
            });
        }
        if event.start_frame > event.end_frame || prev_end.is_some_and(|p| event.start_frame <= p) {
            return Err(ValidationError::UnsortedDetections {
                start: event.start_frame,
                end: event.end_frame,
            });
        }
        prev_end = Some(event.end_frame);
    }
    for blink in &annotated.blinks {
        if !extent.contains(blink.start_frame, blink.end_frame) {
            return Err(ValidationError::AnnotatedOutsideExtent {
                start: blink.start_frame,
                end: blink.end_frame,
                first: extent.first,
                last: extent.last,
            });
        }
    }
    Ok(())
}

/// Scores detected events against annotations over the trace extent.
///
/// `tn_strict` switches the TN rule from "no unmatched annotated frame in
/// the gap" to "no annotated frame at all in the gap".
pub fn score_events(
    detected: &[BlinkEvent],
    annotated: &AnnotationSet,
    extent: FrameInterval,
    tn_strict: bool,
) -> Result<(ConfusionCounts, MatchDetail), ValidationError> {
    check_inputs(detected, annotated, extent)?;

    let mut annotated_matched = vec![false; annotated.blinks.len()];
    let mut detail_detected = Vec::with_capacity(detected.len());
    let mut true_positives = 0u64;
    let mut false_positives = 0u64;

    for event in detected {
        let matched_annotations: Vec<usize> = annotated
            .blinks
            .iter()
            .enumerate()
            .filter(|(_, b)| {
                ranges_overlap(
                    event.start_frame,
                    event.end_frame,
                    b.start_frame,
                    b.end_frame,
                )
            })
            .map(|(i, _)| i)
            .collect();
        if matched_annotations.is_empty() {
            false_positives += 1;
        } else {
            true_positives += 1;
            for &i in &matched_annotations {
                annotated_matched[i] = true;
            }
        }
        detail_detected.push(DetectedOutcome {
            start_frame: event.start_frame,
            end_frame: event.end_frame,
            completeness: event.completeness,
            matched_annotations,
        });
    }

    let detail_annotated: Vec<AnnotatedOutcome> = annotated
        .blinks
        .iter()
        .zip(&annotated_matched)
        .map(|(b, &matched)| AnnotatedOutcome {
            start_frame: b.start_frame,
            end_frame: b.end_frame,
            completeness: b.completeness,
            matched,
        })
        .collect();
    let false_negatives = annotated_matched.iter().filter(|m| !**m).count() as u64;

    // Open gaps: maximal uncovered intervals, including leading/trailing.
    let mut gaps = Vec::new();
    let mut cursor = extent.first;
    for event in detected {
        if event.start_frame > cursor {
            gaps.push((cursor, event.start_frame - 1));
        }
        cursor = event.end_frame + 1;
    }
    if cursor <= extent.last {
        gaps.push((cursor, extent.last));
    }

    let mut true_negatives = 0u64;
    let detail_gaps: Vec<GapOutcome> = gaps
        .into_iter()
        .map(|(start_frame, end_frame)| {
            let disqualified = detail_annotated.iter().any(|a| {
                (tn_strict || !a.matched)
                    && ranges_overlap(start_frame, end_frame, a.start_frame, a.end_frame)
            });
            if !disqualified {
                true_negatives += 1;
            }
            GapOutcome {
                start_frame,
                end_frame,
                true_negative: !disqualified,
            }
        })
        .collect();

    Ok((
        ConfusionCounts {
            true_positives,
            false_positives,
            false_negatives,
            true_negatives,
        },
        MatchDetail {
            detected: detail_detected,
            annotated: detail_annotated,
            gaps: detail_gaps,
        },
    ))
}

/// Brute-force reference: materializes per-frame membership bitmaps over
/// the extent and evaluates the outcome definitions by exhaustive scan.
/// Must equal [`score_events`] on every input. Memory is O(extent length),
/// so keep extents modest.
pub fn score_events_oracle(
    detected: &[BlinkEvent],
    annotated: &AnnotationSet,
    extent: FrameInterval,
    tn_strict: bool,
) -> Result<ConfusionCounts, ValidationError> {
    check_inputs(detected, annotated, extent)?;

    let len = (extent.last - extent.first + 1) as usize;
    let at = |frame: u64| (frame - extent.first) as usize;

    let mut detected_cover = vec![false; len];
    for event in detected {
        for frame in event.start_frame..=event.end_frame {
            detected_cover[at(frame)] = true;
        }
    }
    let mut annotated_cover = vec![false; len];
    for blink in &annotated.blinks {
        for frame in blink.start_frame..=blink.end_frame {
            annotated_cover[at(frame)] = true;
        }
    }

    let true_positives = detected
        .iter()
        .filter(|e| (e.start_frame..=e.end_frame).any(|f| annotated_cover[at(f)]))
        .count() as u64;
    let false_positives = detected.len() as u64 - true_positives;

    let matched: Vec<bool> = annotated
        .blinks
        .iter()
        .map(|b| (b.start_frame..=b.end_frame).any(|f| detected_cover[at(f)]))
        .collect();
    let false_negatives = matched.iter().filter(|m| !**m).count() as u64;

    let mut disqualifying = vec![false; len];
    for (blink, &is_matched) in annotated.blinks.iter().zip(&matched) {
        if tn_strict || !is_matched {
            for frame in blink.start_frame..=blink.end_frame {
                disqualifying[at(frame)] = true;
            }
        }
    }

    let mut true_negatives = 0u64;
    let mut i = 0usize;
    while i < len {
        if detected_cover[i] {
            i += 1;
            continue;
        }
        let mut clean = true;
        while i < len && !detected_cover[i] {
            clean &= !disqualifying[i];
            i += 1;
        }
        if clean {
            true_negatives += 1;
        }
    }

    Ok(ConfusionCounts {
        true_positives,
        false_positives,
        false_negatives,
        true_negatives,
    })
}

/// Precision, recall, F1, and accuracy over a set of counts. A metric
/// whose denominator is zero is undefined, never 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub accuracy: Option<f64>,
    pub counts: ConfusionCounts,
}

/// Harmonic mean of precision and recall; undefined when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    let denominator = precision + recall;
    if denominator == 0.0 {
        None
    } else {
        Some(2.0 * precision * recall / denominator)
    }
}

pub fn compute_metrics(counts: ConfusionCounts) -> MetricsReport {
    let ratio = |numerator: u64, denominator: u64| {
        (denominator != 0).then(|| numerator as f64 / denominator as f64)
    };
    let precision = ratio(
        counts.true_positives,
        counts.true_positives + counts.false_positives,
    );
    let recall = ratio(
        counts.true_positives,
        counts.true_positives + counts.false_negatives,
    );
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => f1_score(p, r),
        _ => None,
    };
    let accuracy = ratio(
        counts.true_positives + counts.true_negatives,
        counts.true_positives
            + counts.true_negatives
            + counts.false_positives
            + counts.false_negatives,
    );
    MetricsReport {
        precision,
        recall,
        f1,
        accuracy,
        counts,
    }
}

/// Over TP pairs where a detected event overlaps exactly one annotated
/// blink, the fraction whose completeness labels agree. Undefined when no
/// such pair exists.
pub fn completeness_agreement(detail: &MatchDetail) -> Option<f64> {
    let mut pairs = 0u64;
    let mut agree = 0u64;
    for outcome in &detail.detected {
        if let [index] = outcome.matched_annotations[..] {
            pairs += 1;
            if outcome.completeness == detail.annotated[index].completeness {
                agree += 1;
            }
        }
    }
    (pairs > 0).then(|| agree as f64 / pairs as f64)
}
