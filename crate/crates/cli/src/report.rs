//! Report assembly for `validate`, plus the events CSV written by `detect`.
//!
//! Report JSON schema: top-level keys `videos` (array), `aggregate`,
//! `config`, `version`. Counts are integers; metrics are numbers or null
//! when undefined. Metric values are reported both raw and rounded to
//! four decimal places.

use serde::Serialize;
use sha2::{Digest, Sha256};

use blinklab_core::detector::{BlinkEvent, DetectorConfig};
use blinklab_core::validation::{ConfusionCounts, MetricsReport};

pub const EVENTS_CSV_HEADER: &str =
    "start_frame,end_frame,completeness,source,min_openness,truncated";

/// Serializes detected events in the `detect` output format.
pub fn events_to_csv(events: &[BlinkEvent]) -> String {
    let mut out = String::from(EVENTS_CSV_HEADER);
    out.push('\n');
    for e in events {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.start_frame,
            e.end_frame,
            e.completeness.as_str(),
            e.source.as_str(),
            e.min_openness,
            e.truncated
        ));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub videos: Vec<VideoEntry>,
    pub aggregate: AggregateEntry,
    pub config: ConfigEcho,
    pub version: String,
}

#[derive(Debug, Serialize)]
pub struct VideoEntry {
    pub video_id: String,
    pub trace_path: String,
    pub annotation_path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotations_sha256: Option<String>,
    pub warnings: Vec<String>,
    /// Set when the video was skipped; the remaining fields are then absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<BlinkEvent>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<ConfusionCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics_rounded: Option<MetricsView>,
}

#[derive(Debug, Serialize)]
pub struct AggregateEntry {
    pub counts: ConfusionCounts,
    pub metrics: MetricsView,
    pub metrics_rounded: MetricsView,
}

impl AggregateEntry {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let metrics = blinklab_core::validation::compute_metrics(counts);
        AggregateEntry {
            counts,
            metrics: MetricsView::raw(&metrics),
            metrics_rounded: MetricsView::rounded(&metrics),
        }
    }
}

/// Effective configuration echoed into the report.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub detector: DetectorConfig,
    /// Interpolation limit; null means strict gap handling.
    pub fill_gaps: Option<u64>,
    pub tn_strict: bool,
}

/// The four metric values, null when undefined.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricsView {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub accuracy: Option<f64>,
}

impl MetricsView {
    pub fn raw(metrics: &MetricsReport) -> Self {
        MetricsView {
            precision: metrics.precision,
            recall: metrics.recall,
            f1: metrics.f1,
            accuracy: metrics.accuracy,
        }
    }

    pub fn rounded(metrics: &MetricsReport) -> Self {
        MetricsView {
            precision: metrics.precision.map(round4),
            recall: metrics.recall.map(round4),
            f1: metrics.f1.map(round4),
            accuracy: metrics.accuracy.map(round4),
        }
    }
}

pub fn round4(value: f64) -> f64 {
    (value * 10_000.0).round() / 10_000.0
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn format_metric(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.4}"),
        None => "undefined".into(),
    }
}

/// The aggregate block printed to standard output, in display order.
pub fn aggregate_metric_lines(metrics: &MetricsReport) -> Vec<String> {
    vec![
        format!("Accuracy: {}", format_metric(metrics.accuracy)),
        format!("Precision: {}", format_metric(metrics.precision)),
        format!("Recall: {}", format_metric(metrics.recall)),
        format!("F1-Score: {}", format_metric(metrics.f1)),
    ]
}
