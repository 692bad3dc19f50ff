//! `qgeo` — batch front-end for the mixed-state geometry library.
//!
//! Every subcommand reads a JSON parameter file and writes CSV or a plain
//! key-value report. Exit codes: 0 on success, 2 for configuration or
//! validation problems, 3 when a numerical assumption fails at run time
//! (degenerate spectra, rank changes, non-convergence, vanishing
//! interferometric overlaps).

// `!(x > 0)`-style comparisons are deliberate: they reject NaN inputs where
// the suggested rewrite would accept them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad input: malformed config, invalid matrices, impossible grids.
    Config(String),
    /// A numerical assumption failed while computing.
    Numerical(String),
}

impl CliError {
    fn is_numerical(e: &qgeo::Error) -> bool {
        matches!(
            e,
            qgeo::Error::DegenerateSpectrum { .. }
                | qgeo::Error::RankChange { .. }
                | qgeo::Error::ConvergenceFailure { .. }
                | qgeo::Error::VanishingOverlap { .. }
                | qgeo::Error::AmbiguousMatching { .. }
        )
    }

    /// Attaches the offending parameter value (grid time, inverse
    /// temperature) to a numerical failure.
    fn from_qgeo_at(e: qgeo::Error, at: f64) -> Self {
        if Self::is_numerical(&e) {
            if at.is_nan() {
                CliError::Numerical(e.to_string())
            } else {
                CliError::Numerical(format!("{e} (at parameter value {at})"))
            }
        } else {
            CliError::from(e)
        }
    }
}

impl From<qgeo::Error> for CliError {
    fn from(e: qgeo::Error) -> Self {
        if Self::is_numerical(&e) {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qgeo",
    version,
    about = "Geometry along paths of mixed quantum states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the line element and its split along a path of states
    MetricPath(CommonArgs),
    /// Emit qubit geodesic curves (sample gallery or a custom spec)
    Geodesic(CommonArgs),
    /// Compare the Bures element against the spectral line element
    Bures(CommonArgs),
    /// Simulate the two-beam interferometric read-out of the metric
    Interfere(CommonArgs),
    /// Sweep thermal response coefficients over inverse temperature
    ThermalScan(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON parameter file
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validation tolerance for input matrices
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// RNG seed for fuzz modes
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn write_output(target: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match target {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::MetricPath(args) => {
            if args.tol <= 0.0 {
                return Err(CliError::Config("tolerance must be positive".into()));
            }
            let cfg = config::load(&args.config)?;
            let csv = commands::cmd_metric_path(&cfg, args.tol)?;
            write_output(&args.out, &csv)
        }
        Command::Geodesic(args) => {
            let cfg = config::load(&args.config)?;
            let csv = commands::cmd_geodesic(&cfg)?;
            write_output(&args.out, &csv)
        }
        Command::Bures(args) => {
            if args.tol <= 0.0 {
                return Err(CliError::Config("tolerance must be positive".into()));
            }
            let cfg = config::load(&args.config)?;
            let report = commands::cmd_bures(&cfg, args.tol, args.seed)?;
            write_output(&args.out, &report)
        }
        Command::Interfere(args) => {
            if args.tol <= 0.0 {
                return Err(CliError::Config("tolerance must be positive".into()));
            }
            let cfg = config::load(&args.config)?;
            let report = commands::cmd_interfere(&cfg, args.tol)?;
            write_output(&args.out, &report)
        }
        Command::ThermalScan(args) => {
            let cfg = config::load(&args.config)?;
            let csv = commands::cmd_thermal_scan(&cfg)?;
            write_output(&args.out, &csv)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(3);
        }
    }
}
