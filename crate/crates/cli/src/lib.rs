//! Batch front end: parses flags and config, runs a subcommand, writes the
//! report and maps the outcome to an exit code.

pub mod commands;
pub mod config;
pub mod models;
pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::Parser;

use crate::config::{Cli, Command, Format, Settings};
use crate::report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_SIZE_GUARD: i32 = 3;

#[derive(Debug)]
pub enum Failure {
    Schema(String),
    Core(chamberwalk::Error),
}

impl From<chamberwalk::Error> for Failure {
    fn from(e: chamberwalk::Error) -> Self {
        Failure::Core(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Schema(m) => write!(f, "invalid input: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(chamberwalk::Error::SizeGuard(_)) => EXIT_SIZE_GUARD,
            _ => EXIT_SCHEMA,
        }
    }
}

/// A finished command: the JSON report and its CSV rendering.
#[derive(Debug)]
pub struct Output {
    pub report: Report,
    pub csv: String,
}

/// Resolves the config file and runs one command.
pub fn execute(command: &Command) -> Result<Output, Failure> {
    let flags = command.settings();
    let settings = match &flags.config {
        Some(path) => {
            let base = Settings::from_json(&models::read(path)?)
                .map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))?;
            flags.over(&base)
        }
        None => flags.clone(),
    };
    let out = match command {
        Command::CoxeterTables(_) => commands::coxeter_tables(&settings),
        Command::Ball(_) => commands::ball(&settings),
        Command::Simulate(_) => commands::simulate(&settings),
        Command::Induce(_) => commands::induce(&settings),
        Command::Quotient(_) => commands::quotient(&settings),
        Command::Discretize(_) => commands::discretize(&settings),
        Command::Verify(_) => commands::verify(&settings),
    }?;
    write_output(command.name(), &settings, &out)?;
    Ok(out)
}

fn write_output(name: &str, s: &Settings, out: &Output) -> Result<(), Failure> {
    let (ext, body) = match s.format.unwrap_or(Format::Json) {
        Format::Json => ("json", out.report.to_json_string()),
        Format::Csv => ("csv", out.csv.clone()),
    };
    let io = |e: std::io::Error| Failure::Schema(e.to_string());
    match &s.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io)?;
            fs::write(dir.join(format!("{name}.{ext}")), body).map_err(io)?;
            if ext == "csv" {
                fs::write(dir.join(format!("{name}.json")), out.report.to_json_string()).map_err(io)?;
            }
        }
        None => std::io::stdout().write_all(body.as_bytes()).map_err(io)?,
    }
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(out) if out.report.passed() => EXIT_OK,
        Ok(out) => {
            for c in out.report.checks.iter().filter(|c| !c.verdict) {
                eprintln!("check failed: {}", c.check);
            }
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
