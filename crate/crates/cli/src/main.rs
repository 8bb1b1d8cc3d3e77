use std::process::ExitCode;

use clap::Parser;

use setalg_cli::commands::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match execute(&cli) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("setalg: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &output.text),
        None => {
            print!("{}", output.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("setalg: i/o error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(output.exit_code as u8)
}
