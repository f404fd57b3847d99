use std::process::ExitCode;

use kuramoto_cli::{parse_args, run, CliError};

fn main() -> ExitCode {
    let result = parse_args(std::env::args()).and_then(|cfg| {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        run(&cfg, &mut lock)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Clap(e)) => {
            let code = e.exit_code();
            let _ = e.print();
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("kuramoto: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
