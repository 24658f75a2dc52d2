//! `blinklab` command-line tool.
//!
//! Three subcommands tie the pipeline together:
//!
//! - `detect` — parse a trace CSV, run the detector, write the events as
//!   CSV and optionally an SVG chart of the signals with threshold lines.
//! - `validate` — run detection plus annotation scoring for every video in
//!   a manifest, write a JSON report, and print the aggregate metrics.
//! - `synth` — generate a synthetic trace and matching annotations from a
//!   generator spec.
//!
//! Exit status: 0 on success, 1 on usage or configuration errors, 2 on
//! unreadable or unparseable input data.

pub mod cli;
pub mod commands;
pub mod manifest;
pub mod report;
pub mod svg;

pub use cli::{Cli, Command};
pub use commands::{run_detect, run_synth, run_validate, CliError};
