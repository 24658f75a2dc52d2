use std::process::exit;

use clap::error::ErrorKind;
use clap::Parser;

use blinklab::{run_detect, run_synth, run_validate, Cli, Command};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            exit(code);
        }
    };
    let result = match &cli.command {
        Command::Detect(args) => run_detect(args),
        Command::Validate(args) => run_validate(args),
        Command::Synth(args) => run_synth(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        exit(err.exit_code());
    }
}
