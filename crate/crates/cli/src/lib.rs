//! Library side of the `cluster` binary: CSV ingestion, result files,
//! reports and the run/bench commands.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use commands::{bench_cells, bench_command, prepare, run_bench, run_command};
pub use error::{exit, CliError, DataError};
pub use io::{load_dataset, read_centers, read_labels, CsvOptions};
pub use report::{BenchReport, BenchRow, RunReport};

/// Parses `argv`, runs the command and returns the process exit code.
/// Reports go to stdout unless a report path was given; diagnostics go to
/// stderr.
pub fn main_with<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        None => {
            let report = run_command(&cli.run)?;
            for event in &report.fallback_events {
                eprintln!("warning: {event}");
            }
            if cli.run.report_out.is_none() {
                print!("{}", commands::to_json(&report));
            }
            Ok(())
        }
        Some(args::Command::Bench(b)) => {
            let report = bench_command(b)?;
            eprint!("{}", report.table());
            if b.report_out.is_none() {
                print!("{}", commands::to_json(&report));
            }
            if report.identical {
                Ok(())
            } else {
                Err(CliError::Mismatch(report.mismatches.join("; ")))
            }
        }
    }
}
