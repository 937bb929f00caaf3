mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Inpaint(a) => commands::inpaint(a),
        Command::Mask(a) => commands::mask(a),
        Command::Eval(a) => commands::eval(a),
        Command::Stats(a) => commands::stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            if matches!(f, commands::Failure::Usage(_)) {
                eprintln!("run with --help for usage");
            }
            ExitCode::from(f.exit_code())
        }
    }
}
