use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use fbb_cli::args::Cli;
use fbb_cli::execute;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut log = stderr.lock();
    let code = match execute(&cli, &mut out, &mut log) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
