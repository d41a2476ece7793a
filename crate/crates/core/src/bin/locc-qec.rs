use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use locc_qec::cli::{self, Cli, EXIT_INPUT};

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match cli::run(&args) {
        Ok(outcome) => {
            if args.global.out.is_none() {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(outcome.rendered.as_bytes());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
