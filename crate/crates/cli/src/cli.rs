//! Argument definitions for the `blinklab` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blinklab_core::detector::EyePolicy;

#[derive(Parser, Debug)]
#[command(
    name = "blinklab",
    version,
    about = "Blink detection and validation for per-frame eye-openness/EAR exports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Detect blink events in a trace CSV and write them as CSV.
    Detect(DetectArgs),
    /// Score detections against specialist annotations for every video in a manifest.
    Validate(ValidateArgs),
    /// Generate a synthetic trace with known ground-truth annotations.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Input trace CSV.
    #[arg(long)]
    pub trace: PathBuf,
    /// Detector config JSON; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output events CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional SVG chart of the signals, thresholds, and detected intervals.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Interpolate gaps of up to N missing frames; without it any gap is an error.
    #[arg(long, value_name = "N")]
    pub fill_gaps: Option<u64>,
    /// Disable the complementary EAR detection path.
    #[arg(long)]
    pub no_ear: bool,
    /// Override the eye combination policy from the config.
    #[arg(long, value_enum)]
    pub eye_policy: Option<EyePolicyArg>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Manifest CSV with header `video_id,trace_path,annotation_path`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Detector config JSON; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output report JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Fail on the first unreadable or unparseable video instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    /// Interpolate gaps of up to N missing frames; without it any gap is an error.
    #[arg(long, value_name = "N")]
    pub fill_gaps: Option<u64>,
    /// Disable the complementary EAR detection path.
    #[arg(long)]
    pub no_ear: bool,
    /// Count no gap as a true negative if it contains any annotated frame,
    /// even from an already-matched blink.
    #[arg(long)]
    pub tn_strict: bool,
    /// Override the eye combination policy from the config.
    #[arg(long, value_enum)]
    pub eye_policy: Option<EyePolicyArg>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Generator spec JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Output trace CSV.
    #[arg(long)]
    pub trace: PathBuf,
    /// Output annotation text.
    #[arg(long)]
    pub annotations: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum EyePolicyArg {
    Min,
    Left,
    Right,
    Mean,
}

impl From<EyePolicyArg> for EyePolicy {
    fn from(arg: EyePolicyArg) -> EyePolicy {
        match arg {
            EyePolicyArg::Min => EyePolicy::Min,
            EyePolicyArg::Left => EyePolicy::Left,
            EyePolicyArg::Right => EyePolicy::Right,
            EyePolicyArg::Mean => EyePolicy::Mean,
        }
    }
}
