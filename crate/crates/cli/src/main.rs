use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;

use args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(help) = e.help() {
                eprintln!("{help}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
