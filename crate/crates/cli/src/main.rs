use std::process::ExitCode;

use clap::Parser;
use opint_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(out) => {
            for line in out.summary {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("opint: error{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
