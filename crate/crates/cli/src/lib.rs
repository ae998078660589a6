//! Front end for `kemeny-core`: parses chain, edge-list and perturbation
//! files, runs an analysis and writes a versioned JSON report.
//!
//! Exit codes: 0 success, 1 usage, 2 input or validation failure,
//! 3 numerical failure.

pub mod commands;
pub mod error;
pub mod format;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::Cli;
pub use error::{CliError, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
pub use report::AnalysisReport;

fn emit(json: &str, out: Option<&std::path::Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, json).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(json.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = commands::dispatch(&cli).and_then(|(report, out)| emit(&report.to_json()?, out.as_deref()));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
