//! Command-line front end: argument parsing, config merging, snapshot and
//! Hamiltonian file IO, and the CSV/JSON report writers around `qtraj-core`.
//!
//! Exit codes: 0 success, 2 rejected input, 3 numerical failure (including a
//! failed `audit`).

use std::ffi::OsString;

use clap::Parser;
use qtraj_core::Error as CoreError;
use thiserror::Error;

pub mod args;
pub mod config;
pub mod matjson;
pub mod pipeline;
pub mod report;

use args::{AnalyzeArgs, Cli, Command, RunArgs};
use config::{resolve_output, Settings, Target};
use pipeline::Analysis;

#[derive(Debug, Error)]
pub enum CliError {
    /// Input the tool refuses to start on: bad flags, malformed files,
    /// out-of-range parameters.
    #[error("{0}")]
    Validation(String),
    /// The computation itself went bad: integration left the physical
    /// envelope, an eigensolve stalled, a state lost rank.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::DimensionMismatch { .. }
            | CoreError::InvalidDensity { .. }
            | CoreError::InvalidParameter { .. }
            | CoreError::OutOfDomain { .. }
            | CoreError::TooFewSnapshots { .. }
            | CoreError::InvalidSnapshot { .. }
            | CoreError::NonIncreasingTimes { .. }
            | CoreError::GridMismatch { .. } => CliError::Validation(e.to_string()),
            CoreError::EigenIterationLimit { .. }
            | CoreError::SupportViolation { .. }
            | CoreError::RankDeficient { .. }
            | CoreError::IntegrationFailure { .. }
            | CoreError::ImaginaryResidue { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

/// Writes the CSV and summary files, printing each path written.
fn write_outputs(
    analysis: &Analysis,
    out_csv: &std::path::Path,
    out_json: &std::path::Path,
) -> Result<(), CliError> {
    report::write_csv(out_csv, &analysis.ledger)?;
    println!("wrote {}", out_csv.display());
    report::write_json(out_json, &report::summary_value(analysis))?;
    println!("wrote {}", out_json.display());
    Ok(())
}

fn analyze_settings(settings: &Settings, command: &str) -> Result<Analysis, CliError> {
    match &settings.target {
        Target::Scenario(_) => pipeline::run_scenario(settings, command),
        Target::Custom(spec) => pipeline::run_custom(settings, spec, command),
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let settings = Settings::merge(args)?;
    let analysis = analyze_settings(&settings, "run")?;
    print!("{}", report::render_table(&analysis));
    let csv = resolve_output(
        settings.out_csv.as_deref(),
        &format!("{}-ledger.csv", analysis.label),
    );
    let json = resolve_output(
        settings.out_json.as_deref(),
        &format!("{}-summary.json", analysis.label),
    );
    write_outputs(&analysis, &csv, &json)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let analysis = pipeline::run_analyze(args)?;
    print!("{}", report::render_table(&analysis));
    let csv = resolve_output(args.out_csv.as_deref(), "snapshots-ledger.csv");
    let json = resolve_output(args.out_json.as_deref(), "snapshots-summary.json");
    write_outputs(&analysis, &csv, &json)
}

/// Like `run`, but writes files only when asked and fails (exit 3) when any
/// identity check or gating bound audit fails.
fn cmd_audit(args: &RunArgs) -> Result<bool, CliError> {
    let settings = Settings::merge(args)?;
    let analysis = analyze_settings(&settings, "audit")?;
    print!("{}", report::render_table(&analysis));
    if let Some(csv) = &settings.out_csv {
        report::write_csv(csv, &analysis.ledger)?;
        println!("wrote {}", csv.display());
    }
    if let Some(json) = &settings.out_json {
        report::write_json(json, &report::summary_value(&analysis))?;
        println!("wrote {}", json.display());
    }
    let pass = analysis.gates_pass();
    println!("audit: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn cmd_list() -> Result<(), CliError> {
    // Beta only parameterizes the instances; names and summaries are fixed.
    for scenario in qtraj_core::scenarios::Scenario::catalog(1.0)? {
        println!("{:<14} {}", scenario.name(), scenario.summary());
    }
    Ok(())
}

/// Parses `argv` and runs the selected command, returning the process exit
/// code. Errors print to stderr.
pub fn run<I>(argv: I) -> i32
where
    I: IntoIterator<Item = OsString>,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Prints help/version to stdout, usage errors to stderr.
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Audit(args) => match cmd_audit(args) {
            Ok(true) => Ok(()),
            Ok(false) => return 3,
            Err(e) => Err(e),
        },
        Command::ListScenarios => cmd_list(),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
