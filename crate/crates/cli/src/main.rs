use std::io::ErrorKind;
use std::process::ExitCode;

use clap::Parser;
use irobd_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match irobd_cli::execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            let closed = e
                .chain()
                .filter_map(|c| c.downcast_ref::<std::io::Error>())
                .any(|io| io.kind() == ErrorKind::BrokenPipe);
            if closed {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
