mod cli;
mod commands;
mod overlay;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

fn main() -> ExitCode {
    let cmd = cli::Cli::command();
    let args = match overlay::expand(&cmd, std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let parsed = cmd
        .try_get_matches_from(args)
        .and_then(|m| cli::Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(c) => c,
        // Help and version exit 0; usage errors exit 2.
        Err(e) => e.exit(),
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Stage errors already embed their cause in the message.
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
