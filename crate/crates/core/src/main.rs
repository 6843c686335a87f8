use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use parabolic::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            // a closed pipe is not an error of the computation
            let _ = writeln!(std::io::stdout().lock(), "{}", report.render(cli.format));
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
