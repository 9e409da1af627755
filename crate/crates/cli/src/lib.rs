//! Command-line frontend: argument parsing, subcommand execution and
//! report serialization.

pub mod args;
pub mod commands;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use commands::Invocation;

/// Parse `argv` (including the program name) and run the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::Fit1d(a) => commands::fit1d(&Invocation::new("fit1d", echo), a),
        Command::Fit2d(a) => commands::fit2d(&Invocation::new("fit2d", echo), a),
        Command::Sweep(a) => commands::sweep(&Invocation::new("sweep", echo), a),
        Command::DiagnoseTable3(a) => commands::diagnose_table3(&Invocation::new("diagnose-table3", echo), a),
        Command::Gradcheck(a) => commands::gradcheck(&Invocation::new("gradcheck", echo), a),
        Command::Linkcalc(a) => commands::linkcalc(&Invocation::new("linkcalc", echo), a),
        Command::ExportFixture(a) => commands::export_fixture(a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("semloss: {f}");
            f.exit_code()
        }
    }
}
