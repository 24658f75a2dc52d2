//! Subcommand implementations behind the thin `main`.

use std::fmt;
use std::fs;
use std::path::Path;

use blinklab_core::detector::{combine_eyes, detect, ear_baseline, DetectorConfig};
use blinklab_core::ingest::{
    normalize_trace, parse_annotations, parse_trace_csv, serialize_annotations,
    serialize_trace_csv, GapPolicy,
};
use blinklab_core::synthgen::{generate, SyntheticSpec};
use blinklab_core::validation::{
    aggregate, compute_metrics, score_events, ConfusionCounts, FrameInterval,
};

use crate::cli::{DetectArgs, EyePolicyArg, SynthArgs, ValidateArgs};
use crate::manifest::{parse_manifest, ManifestEntry};
use crate::report::{
    aggregate_metric_lines, events_to_csv, sha256_hex, AggregateEntry, ConfigEcho, MetricsView,
    RunReport, VideoEntry,
};
use crate::svg::render_chart;

/// Command failure carrying its exit status class.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or configuration: exit status 1.
    Usage(String),
    /// Unreadable or unparseable input data: exit status 2.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

fn effective_config(
    path: Option<&Path>,
    no_ear: bool,
    eye_policy: Option<EyePolicyArg>,
) -> Result<DetectorConfig, CliError> {
    let mut config = match path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            DetectorConfig::from_json(&text).map_err(|e| CliError::Usage(e.to_string()))?
        }
        None => DetectorConfig::default(),
    };
    if no_ear {
        config.ear_enabled = false;
    }
    if let Some(policy) = eye_policy {
        config.eye_policy = policy.into();
    }
    Ok(config)
}

fn gap_policy(fill_gaps: Option<u64>) -> GapPolicy {
    match fill_gaps {
        Some(max_gap) => GapPolicy::Interpolate { max_gap },
        None => GapPolicy::Strict,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn run_detect(args: &DetectArgs) -> Result<(), CliError> {
    let config = effective_config(args.config.as_deref(), args.no_ear, args.eye_policy)?;
    let text = fs::read_to_string(&args.trace)
        .map_err(|e| CliError::Data(format!("cannot read trace {}: {e}", args.trace.display())))?;
    let video_id = args
        .trace
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());

    let trace = parse_trace_csv(&text, video_id).map_err(|e| CliError::Data(e.to_string()))?;
    let (trace, issues) = normalize_trace(&trace, gap_policy(args.fill_gaps))
        .map_err(|e| CliError::Data(e.to_string()))?;
    for issue in &issues {
        eprintln!("warning: {}: {}", trace.video_id, issue.detail);
    }

    let detection = detect(&trace, &config);
    for warning in &detection.warnings {
        eprintln!("warning: {}: {warning}", trace.video_id);
    }

    write_file(&args.out, &events_to_csv(&detection.events))?;

    if let Some(svg_path) = &args.svg {
        let series = combine_eyes(&trace, config.eye_policy);
        let baseline = if config.ear_enabled {
            ear_baseline(&series, &config).ok()
        } else {
            None
        };
        write_file(
            svg_path,
            &render_chart(&series, &detection.events, &config, baseline),
        )?;
    }
    Ok(())
}

pub fn run_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let config = effective_config(args.config.as_deref(), args.no_ear, args.eye_policy)?;
    let manifest_text = fs::read_to_string(&args.manifest).map_err(|e| {
        CliError::Data(format!(
            "cannot read manifest {}: {e}",
            args.manifest.display()
        ))
    })?;
    let base_dir = args.manifest.parent().unwrap_or_else(|| Path::new("."));
    let entries = parse_manifest(&manifest_text, base_dir).map_err(CliError::Data)?;

    let mut videos = Vec::with_capacity(entries.len());
    let mut per_video_counts = Vec::new();
    for entry in &entries {
        match process_video(entry, &config, gap_policy(args.fill_gaps), args.tn_strict) {
            Ok(video) => {
                for warning in &video.warnings {
                    eprintln!("warning: {}: {warning}", video.video_id);
                }
                if let Some(counts) = video.counts {
                    per_video_counts.push(counts);
                }
                videos.push(video);
            }
            Err(message) => {
                if args.strict {
                    return Err(CliError::Data(format!("{}: {message}", entry.video_id)));
                }
                eprintln!("warning: skipping {}: {message}", entry.video_id);
                videos.push(VideoEntry {
                    video_id: entry.video_id.clone(),
                    trace_path: entry.trace_path.display().to_string(),
                    annotation_path: entry.annotation_path.display().to_string(),
                    trace_sha256: None,
                    annotations_sha256: None,
                    warnings: Vec::new(),
                    error: Some(message),
                    events: None,
                    counts: None,
                    metrics: None,
                    metrics_rounded: None,
                });
            }
        }
    }

    let pooled = aggregate(&per_video_counts);
    let pooled_metrics = compute_metrics(pooled);
    let report = RunReport {
        videos,
        aggregate: AggregateEntry::from_counts(pooled),
        config: ConfigEcho {
            detector: config,
            fill_gaps: args.fill_gaps,
            tn_strict: args.tn_strict,
        },
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Data(format!("cannot serialize report: {e}")))?;
    write_file(&args.out, &json)?;

    for line in aggregate_metric_lines(&pooled_metrics) {
        println!("{line}");
    }
    Ok(())
}

fn process_video(
    entry: &ManifestEntry,
    config: &DetectorConfig,
    policy: GapPolicy,
    tn_strict: bool,
) -> Result<VideoEntry, String> {
    let trace_bytes = fs::read(&entry.trace_path)
        .map_err(|e| format!("cannot read trace {}: {e}", entry.trace_path.display()))?;
    let trace_sha256 = sha256_hex(&trace_bytes);
    let trace_text =
        String::from_utf8(trace_bytes).map_err(|_| "trace file is not valid UTF-8".to_string())?;
    let trace = parse_trace_csv(&trace_text, &entry.video_id).map_err(|e| format!("trace: {e}"))?;

    let annotation_bytes = fs::read(&entry.annotation_path).map_err(|e| {
        format!(
            "cannot read annotations {}: {e}",
            entry.annotation_path.display()
        )
    })?;
    let annotations_sha256 = sha256_hex(&annotation_bytes);
    let annotation_text = String::from_utf8(annotation_bytes)
        .map_err(|_| "annotation file is not valid UTF-8".to_string())?;
    let annotations = parse_annotations(&annotation_text, &entry.video_id)
        .map_err(|e| format!("annotations: {e}"))?;

    let (trace, issues) = normalize_trace(&trace, policy).map_err(|e| format!("normalize: {e}"))?;
    let mut warnings: Vec<String> = issues.iter().map(|i| i.detail.clone()).collect();

    let detection = detect(&trace, config);
    warnings.extend(detection.warnings.iter().cloned());

    let counts = match trace.frame_bounds() {
        Some((first, last)) => {
            let extent =
                FrameInterval::new(first, last).expect("bounds of a non-empty trace are ordered");
            score_events(&detection.events, &annotations, extent, tn_strict)
                .map_err(|e| format!("scoring: {e}"))?
                .0
        }
        None => {
            warnings.push("trace has no samples; every annotated blink counts as missed".into());
            ConfusionCounts {
                false_negatives: annotations.blinks.len() as u64,
                ..ConfusionCounts::default()
            }
        }
    };
    let metrics = compute_metrics(counts);

    Ok(VideoEntry {
        video_id: entry.video_id.clone(),
        trace_path: entry.trace_path.display().to_string(),
        annotation_path: entry.annotation_path.display().to_string(),
        trace_sha256: Some(trace_sha256),
        annotations_sha256: Some(annotations_sha256),
        warnings,
        error: None,
        events: Some(detection.events),
        counts: Some(counts),
        metrics: Some(MetricsView::raw(&metrics)),
        metrics_rounded: Some(MetricsView::rounded(&metrics)),
    })
}

pub fn run_synth(args: &SynthArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Data(format!("cannot read spec {}: {e}", args.config.display())))?;
    let spec = SyntheticSpec::from_json(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    let (trace, annotations) = generate(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    write_file(&args.trace, &serialize_trace_csv(&trace))?;
    let mut annotation_text = serialize_annotations(&annotations);
    annotation_text.push('\n');
    write_file(&args.annotations, &annotation_text)?;
    Ok(())
}
