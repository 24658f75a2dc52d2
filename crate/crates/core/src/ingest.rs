//! Parsing, serialization, and normalization of the two external data
//! formats: the per-frame signal CSV exported by the analyzer and the
//! specialist annotation text.
//!
//! Trace CSV contract: UTF-8, mandatory header
//! `frame,right_openness,left_openness,right_ear,left_ear`, one data row
//! per frame, `.` decimal separator, LF or CRLF line endings.
//!
//! Annotation contract: whitespace-separated `<start>-<end><c|i>` tokens,
//! where `c` marks a complete blink and `i` an incomplete (partial) one.
//! Flags are accepted case-insensitively and emitted lowercase.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Expected header row of a trace CSV.
pub const TRACE_CSV_HEADER: &str = "frame,right_openness,left_openness,right_ear,left_ear";

const TRACE_COLUMNS: [&str; 5] = [
    "frame",
    "right_openness",
    "left_openness",
    "right_ear",
    "left_ear",
];

/// Openness probabilities must lie in this range.
pub const OPENNESS_RANGE: (f64, f64) = (0.0, 1.0);
/// Sanity bound for EAR values; observed open-eye values sit around 0.2–0.35.
pub const EAR_RANGE: (f64, f64) = (0.0, 2.0);

/// Whether a blink fully closed the eyelids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Completeness {
    Complete,
    Partial,
}

impl Completeness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Completeness::Complete => "complete",
            Completeness::Partial => "partial",
        }
    }

    /// Single-letter annotation flag: `c` for complete, `i` for incomplete.
    pub fn flag(&self) -> char {
        match self {
            Completeness::Complete => 'c',
            Completeness::Partial => 'i',
        }
    }
}

/// One row of a trace: bilateral openness probabilities and EARs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameSample {
    pub frame_index: u64,
    pub right_openness: f64,
    pub left_openness: f64,
    pub right_ear: f64,
    pub left_ear: f64,
}

/// Ordered per-frame samples for one video.
///
/// Frame indices are strictly increasing. After [`normalize_trace`] they
/// are contiguous within each segment; any remaining discontinuity is a
/// segment boundary that downstream detection never bridges.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    pub video_id: String,
    pub samples: Vec<FrameSample>,
    /// Frames per second, informational only.
    pub fps: Option<f64>,
}

impl SignalTrace {
    /// First and last frame index, or `None` for an empty trace.
    pub fn frame_bounds(&self) -> Option<(u64, u64)> {
        match (self.samples.first(), self.samples.last()) {
            (Some(first), Some(last)) => Some((first.frame_index, last.frame_index)),
            _ => None,
        }
    }
}

/// A specialist-annotated blink: inclusive frame range plus completeness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnnotatedBlink {
    pub start_frame: u64,
    pub end_frame: u64,
    pub completeness: Completeness,
}

/// Ground truth for one video: blinks sorted by start frame, pairwise
/// non-overlapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    pub video_id: String,
    pub blinks: Vec<AnnotatedBlink>,
}

impl AnnotationSet {
    /// Builds a set, enforcing the ordering/non-overlap invariants.
    pub fn new(
        video_id: impl Into<String>,
        blinks: Vec<AnnotatedBlink>,
    ) -> Result<Self, IngestError> {
        for pair in blinks.windows(2) {
            if pair[1].start_frame <= pair[0].end_frame {
                return Err(IngestError::AnnotationOrder {
                    token: blink_token(&pair[1]),
                });
            }
        }
        for blink in &blinks {
            if blink.start_frame > blink.end_frame {
                return Err(IngestError::InvertedRange {
                    token: blink_token(blink),
                });
            }
        }
        Ok(AnnotationSet {
            video_id: video_id.into(),
            blinks,
        })
    }
}

/// Something noteworthy found while normalizing a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceIssue {
    pub kind: TraceIssueKind,
    pub frame_index: u64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceIssueKind {
    Gap,
    OutOfRangeValue,
    DuplicateFrame,
    NonMonotonic,
}

/// How [`normalize_trace`] treats missing frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapPolicy {
    /// Any missing frame is an error.
    Strict,
    /// Gaps of at most `max_gap` missing frames are filled by per-channel
    /// linear interpolation; longer gaps split the trace into segments.
    Interpolate { max_gap: u64 },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing header row: expected `{TRACE_CSV_HEADER}`")]
    MissingHeader,
    #[error("header column {position}: expected `{expected}`, found `{found}`")]
    ColumnMismatch {
        position: usize,
        expected: &'static str,
        found: String,
    },
    #[error("header has {found} column(s), expected 5 (`{TRACE_CSV_HEADER}`)")]
    ColumnCount { found: usize },
    #[error("row {row}: expected 5 fields, found {found}")]
    FieldCount { row: usize, found: usize },
    #[error("row {row}: invalid {column} value `{value}`")]
    InvalidValue {
        row: usize,
        column: &'static str,
        value: String,
    },
    #[error("row {row}: {column} value {value} outside [{min}, {max}]")]
    ValueOutOfRange {
        row: usize,
        column: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("row {row}: duplicate frame index {frame}")]
    DuplicateFrame { row: usize, frame: u64 },
    #[error("row {row}: frame index {frame} not greater than previous frame {previous}")]
    NonMonotonicFrame {
        row: usize,
        frame: u64,
        previous: u64,
    },
    #[error("malformed annotation token `{token}`: expected `<start>-<end><c|i>`")]
    MalformedToken { token: String },
    #[error("annotation token `{token}`: start frame exceeds end frame")]
    InvertedRange { token: String },
    #[error("annotation token `{token}` overlaps or precedes an earlier range")]
    AnnotationOrder { token: String },
    #[error("gap at frame {first_missing}: {missing} frame(s) missing under strict gap policy")]
    FrameGap { first_missing: u64, missing: u64 },
}

/// Parses a trace CSV into a [`SignalTrace`].
///
/// Row order is preserved; values are parsed as 64-bit decimals at full
/// precision. Openness values must lie in `[0, 1]` and EAR values in
/// `[0, 2]`. Frame indices must be strictly increasing.
pub fn parse_trace_csv(
    text: &str,
    video_id: impl Into<String>,
) -> Result<SignalTrace, IngestError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(IngestError::MissingHeader)?;
    check_header(header)?;

    let mut samples = Vec::new();
    let mut row = 0usize;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        row += 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(IngestError::FieldCount {
                row,
                found: fields.len(),
            });
        }
        let frame_index: u64 = fields[0].parse().map_err(|_| IngestError::InvalidValue {
            row,
            column: "frame",
            value: fields[0].to_string(),
        })?;
        if let Some(prev) = samples.last().map(|s: &FrameSample| s.frame_index) {
            if frame_index == prev {
                return Err(IngestError::DuplicateFrame {
                    row,
                    frame: frame_index,
                });
            }
            if frame_index < prev {
                return Err(IngestError::NonMonotonicFrame {
                    row,
                    frame: frame_index,
                    previous: prev,
                });
            }
        }
        let mut values = [0.0f64; 4];
        for (i, value) in values.iter_mut().enumerate() {
            let column = TRACE_COLUMNS[i + 1];
            let raw = fields[i + 1];
            *value = raw.parse().map_err(|_| IngestError::InvalidValue {
                row,
                column,
                value: raw.to_string(),
            })?;
            let (min, max) = if i < 2 { OPENNESS_RANGE } else { EAR_RANGE };
            if !(*value >= min && *value <= max) {
                return Err(IngestError::ValueOutOfRange {
                    row,
                    column,
                    value: *value,
                    min,
                    max,
                });
            }
        }
        samples.push(FrameSample {
            frame_index,
            right_openness: values[0],
            left_openness: values[1],
            right_ear: values[2],
            left_ear: values[3],
        });
    }

    Ok(SignalTrace {
        video_id: video_id.into(),
        samples,
        fps: None,
    })
}

fn check_header(header: &str) -> Result<(), IngestError> {
    let columns: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    if columns.len() != TRACE_COLUMNS.len() {
        return Err(IngestError::ColumnCount {
            found: columns.len(),
        });
    }
    for (position, (found, expected)) in columns.iter().zip(TRACE_COLUMNS).enumerate() {
        if *found != expected {
            return Err(IngestError::ColumnMismatch {
                position: position + 1,
                expected,
                found: found.to_string(),
            });
        }
    }
    Ok(())
}

/// Serializes a trace back to the CSV contract. Values round-trip exactly
/// through [`parse_trace_csv`].
pub fn serialize_trace_csv(trace: &SignalTrace) -> String {
    let mut out = String::with_capacity(trace.samples.len() * 32 + TRACE_CSV_HEADER.len() + 1);
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    for s in &trace.samples {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.frame_index, s.right_openness, s.left_openness, s.right_ear, s.left_ear
        ));
    }
    out
}

/// Parses specialist annotation text into an [`AnnotationSet`].
///
/// Tokens appear in order; ranges must be non-overlapping and sorted.
pub fn parse_annotations(
    text: &str,
    video_id: impl Into<String>,
) -> Result<AnnotationSet, IngestError> {
    let mut blinks: Vec<AnnotatedBlink> = Vec::new();
    for token in text.split_whitespace() {
        let blink = parse_token(token)?;
        if let Some(prev) = blinks.last() {
            if blink.start_frame <= prev.end_frame {
                return Err(IngestError::AnnotationOrder {
                    token: token.to_string(),
                });
            }
        }
        blinks.push(blink);
    }
    Ok(AnnotationSet {
        video_id: video_id.into(),
        blinks,
    })
}

fn parse_token(token: &str) -> Result<AnnotatedBlink, IngestError> {
    let malformed = || IngestError::MalformedToken {
        token: token.to_string(),
    };
    if !token.is_ascii() || token.len() < 4 {
        return Err(malformed());
    }
    let (range, flag) = token.split_at(token.len() - 1);
    let completeness = match flag.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('c') => Completeness::Complete,
        Some('i') => Completeness::Partial,
        _ => return Err(malformed()),
    };
    let (start, end) = range.split_once('-').ok_or_else(malformed)?;
    let start_frame: u64 = start.parse().map_err(|_| malformed())?;
    let end_frame: u64 = end.parse().map_err(|_| malformed())?;
    if start_frame > end_frame {
        return Err(IngestError::InvertedRange {
            token: token.to_string(),
        });
    }
    Ok(AnnotatedBlink {
        start_frame,
        end_frame,
        completeness,
    })
}

/// Serializes an annotation set as single-space-separated tokens.
/// Inverse of [`parse_annotations`].
pub fn serialize_annotations(set: &AnnotationSet) -> String {
    set.blinks
        .iter()
        .map(blink_token)
        .collect::<Vec<_>>()
        .join(" ")
}

fn blink_token(blink: &AnnotatedBlink) -> String {
    format!(
        "{}-{}{}",
        blink.start_frame,
        blink.end_frame,
        blink.completeness.flag()
    )
}

/// Fills or splits frame gaps according to `policy`.
///
/// Samples present in the input are never altered. Interpolated gaps and
/// segment splits are reported as [`TraceIssue`]s; under
/// [`GapPolicy::Strict`] the first gap is an error instead.
pub fn normalize_trace(
    trace: &SignalTrace,
    policy: GapPolicy,
) -> Result<(SignalTrace, Vec<TraceIssue>), IngestError> {
    let mut samples: Vec<FrameSample> = Vec::with_capacity(trace.samples.len());
    let mut issues = Vec::new();

    for sample in &trace.samples {
        let prev = match samples.last().copied() {
            Some(p) => p,
            None => {
                samples.push(*sample);
                continue;
            }
        };
        if sample.frame_index <= prev.frame_index {
            return Err(if sample.frame_index == prev.frame_index {
                IngestError::DuplicateFrame {
                    row: samples.len() + 1,
                    frame: sample.frame_index,
                }
            } else {
                IngestError::NonMonotonicFrame {
                    row: samples.len() + 1,
                    frame: sample.frame_index,
                    previous: prev.frame_index,
                }
            });
        }
        let missing = sample.frame_index - prev.frame_index - 1;
        if missing > 0 {
            let first_missing = prev.frame_index + 1;
            match policy {
                GapPolicy::Strict => {
                    return Err(IngestError::FrameGap {
                        first_missing,
                        missing,
                    });
                }
                GapPolicy::Interpolate { max_gap } if missing <= max_gap => {
                    for frame in first_missing..sample.frame_index {
                        samples.push(lerp_sample(&prev, sample, frame));
                    }
                    issues.push(TraceIssue {
                        kind: TraceIssueKind::Gap,
                        frame_index: first_missing,
                        detail: format!(
                            "{missing} missing frame(s) interpolated (frames {first_missing}..={})",
                            sample.frame_index - 1
                        ),
                    });
                }
                GapPolicy::Interpolate { max_gap } => {
                    issues.push(TraceIssue {
                        kind: TraceIssueKind::Gap,
                        frame_index: first_missing,
                        detail: format!(
                            "{missing} missing frame(s) exceed max_gap {max_gap}; trace split into segments at frame {first_missing}"
                        ),
                    });
                }
            }
        }
        samples.push(*sample);
    }

    Ok((
        SignalTrace {
            video_id: trace.video_id.clone(),
            samples,
            fps: trace.fps,
        },
        issues,
    ))
}

fn lerp_sample(a: &FrameSample, b: &FrameSample, frame: u64) -> FrameSample {
    let t = (frame - a.frame_index) as f64 / (b.frame_index - a.frame_index) as f64;
    let lerp = |x: f64, y: f64| x + (y - x) * t;
    FrameSample {
        frame_index: frame,
        right_openness: lerp(a.right_openness, b.right_openness),
        left_openness: lerp(a.left_openness, b.left_openness),
        right_ear: lerp(a.right_ear, b.right_ear),
        left_ear: lerp(a.left_ear, b.left_ear),
    }
}
