//! Command-line surface.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Trajectory thermodynamics toolkit: propagate built-in scenarios or ingest
/// density-matrix snapshots, split energy flow into heat and work along the
/// state's own spectral motion, and emit plot-ready CSV plus a JSON summary
/// with identity and bound audits.
#[derive(Debug, Parser)]
#[command(name = "qtraj", version, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate a scenario and write the full ledger CSV and summary JSON.
    Run(RunArgs),
    /// Recompute the ledger from a snapshot file with finite-difference
    /// derivatives and write the same outputs.
    Analyze(AnalyzeArgs),
    /// Run only the identity and bound checks and print a pass/fail table.
    Audit(RunArgs),
    /// List the built-in scenarios.
    ListScenarios,
}

/// Options shared by `run` and `audit`. Flags override config-file values.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in scenario name (see `list-scenarios`).
    #[arg(long)]
    pub scenario: Option<String>,

    /// JSON config file; unknown keys are rejected.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Bath inverse temperature. Required here or in the config; there is
    /// no default.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Integrator step.
    #[arg(long)]
    pub step: Option<f64>,

    /// Analysis window start.
    #[arg(long)]
    pub t0: Option<f64>,

    /// Analysis window end.
    #[arg(long)]
    pub tf: Option<f64>,

    /// Ledger CSV path. Defaults to `<scenario>-ledger.csv` under
    /// `QTRAJ_OUT_DIR` (or the working directory).
    #[arg(long)]
    pub out_csv: Option<PathBuf>,

    /// Summary JSON path. Defaults to `<scenario>-summary.json` under
    /// `QTRAJ_OUT_DIR` (or the working directory).
    #[arg(long)]
    pub out_json: Option<PathBuf>,

    /// Level-splitting normalization.
    #[arg(long, value_parser = ["sz", "sz-half"])]
    pub convention: Option<String>,

    /// Mix this much identity into every state before analysis; lifts
    /// rank-deficient snapshots onto full support.
    #[arg(long)]
    pub regularize_delta: Option<f64>,

    /// Override a check tolerance as `<name>=<value>`; repeatable.
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    pub tolerances: Vec<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Snapshot file: `{"times": [...], "states": [...]}` with matrices as
    /// row-major nested `[re, im]` pairs.
    #[arg(long)]
    pub snapshots: PathBuf,

    /// Hamiltonian file: `{"matrix": ...}` in the same element encoding.
    #[arg(long)]
    pub hamiltonian: PathBuf,

    /// Bath inverse temperature; required, no default.
    #[arg(long)]
    pub beta: f64,

    /// Ledger CSV path. Defaults to `snapshots-ledger.csv` under
    /// `QTRAJ_OUT_DIR` (or the working directory).
    #[arg(long)]
    pub out_csv: Option<PathBuf>,

    /// Summary JSON path. Defaults to `snapshots-summary.json` under
    /// `QTRAJ_OUT_DIR` (or the working directory).
    #[arg(long)]
    pub out_json: Option<PathBuf>,

    /// Mix this much identity into every state before analysis.
    #[arg(long)]
    pub regularize_delta: Option<f64>,

    /// Override a check tolerance as `<name>=<value>`; repeatable.
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    pub tolerances: Vec<String>,
}
