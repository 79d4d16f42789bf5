//! Experiment harness behind the `irobd` binary.
//!
//! Subcommands: `gen`, `run`, `oracle`, `reduce`, `bounds`, `sweep` and
//! `verify`. Instance files use the JSON format of `irobd_core::model::json`.

pub mod args;
pub mod commands;
pub mod config;
pub mod family;
pub mod sweep;
pub mod verify;

use std::process::ExitCode;

use anyhow::Result;

use args::{Cli, Command};
use config::{ConfigFile, Settings, SolverOverrides};

pub fn settings(cli: &Cli) -> Result<Settings> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let flags = SolverOverrides {
        grad_tol: cli.grad_tol,
        max_iters: cli.max_iters,
        ..Default::default()
    };
    Settings::resolve(file.as_ref(), &flags, cli.threads)
}

/// Runs a parsed command line. Verification failures map to exit code 1.
pub fn execute(cli: &Cli) -> Result<ExitCode> {
    let s = settings(cli)?;
    if let Some(n) = s.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = &s.solver;
    match &cli.command {
        Command::Gen(a) => commands::cmd_gen(a)?,
        Command::Run(a) => commands::cmd_run(a, cfg)?,
        Command::Oracle(a) => commands::cmd_oracle(a, cfg)?,
        Command::Reduce(a) => commands::cmd_reduce(a)?,
        Command::Bounds(a) => commands::cmd_bounds(a)?,
        Command::Sweep(a) => {
            let spec = sweep::load_spec(&a.spec)?;
            let rows = sweep::run_sweep(&spec, cfg);
            let mut buf = Vec::new();
            sweep::write_csv(&rows, &mut buf)?;
            commands::emit(a.out.as_deref(), std::str::from_utf8(&buf)?)?;
        }
        Command::Verify(a) => {
            let report = verify::cmd_verify(a, cfg)?;
            for f in report.failures() {
                let at = match (f.step, f.delay) {
                    (Some(s), Some(j)) => format!(" at step {s}, delay {j}"),
                    (Some(s), None) => format!(" at step {s}"),
                    _ => String::new(),
                };
                eprintln!("FAIL {}{at}: {}", f.name, f.detail);
            }
            commands::emit(a.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
