//! Blink-event detection and validation for per-frame eye signals.
//!
//! The pipeline works on two inputs exported by an upstream eye analyzer:
//! a per-frame trace of eye-openness probabilities and eye aspect ratios
//! (EAR) for both eyes, and specialist annotations marking where blinks
//! begin and end. The crate provides:
//!
//! - [`ingest`] — parsers and serializers for the trace CSV and annotation
//!   text formats, plus gap normalization.
//! - [`detector`] — the blink detector: an openness-threshold hysteresis
//!   state machine, a complementary normalized-EAR detector for partial
//!   blinks, and interval-union fusion of the two.
//! - [`validation`] — event-level scoring of detections against
//!   annotations (overlap-based TP/FP/FN/TN) and the derived metrics.
//! - [`synthgen`] — a deterministic generator of synthetic traces with
//!   known ground truth, used for end-to-end testing.

pub mod detector;
pub mod ingest;
pub mod synthgen;
pub mod validation;

pub use detector::{
    combine_eyes, detect, detect_ear_blinks, detect_openness_blinks, ear_baseline, fuse_events,
    BlinkEvent, CombinedFrame, CombinedSeries, Detection, DetectorConfig, DetectorError,
    EventSource, EyePolicy,
};
pub use ingest::{
    normalize_trace, parse_annotations, parse_trace_csv, serialize_annotations,
    serialize_trace_csv, AnnotatedBlink, AnnotationSet, Completeness, FrameSample, GapPolicy,
    IngestError, SignalTrace, TraceIssue, TraceIssueKind,
};
pub use synthgen::{generate, SynthError, SyntheticSpec};
pub use validation::{
    aggregate, completeness_agreement, compute_metrics, f1_score, score_events,
    score_events_oracle, ConfusionCounts, FrameInterval, MatchDetail, MetricsReport,
    ValidationError,
};
