use std::process::ExitCode;

use clap::Parser;

use tdaband_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tdaband: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
