//! `qgraph`: spectra, flux scans and theorem checks for graph files.
//!
//! Exit codes: 0 on success, 1 on file or parse errors, 2 on solver
//! diagnostics, 3 when a verification row fails.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    FluxScan,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Theorem1,
    Theorem2,
    #[value(name = "theorem2-few-zeros")]
    FewZeros,
    Symmetry,
    Partitions,
}

#[derive(Debug, Parser)]
#[command(
    name = "qgraph",
    version,
    about = "Spectra and Morse-index checks on metric graphs"
)]
pub struct RunConfig {
    #[arg(long, value_enum)]
    pub command: Command,
    /// Graph description file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Eigenvalue index for flux-scan; range `a..b`, list `a,b,c` or single
    /// index for verify.
    #[arg(long)]
    pub n: Option<String>,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    /// Points per axis for flux-scan, samples per unit length for spectrum.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Finite-difference step of the Hessians.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Tolerance of eigenvalue identities and of the symmetry deviation.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Lower end of the eigenvalue scan; defaults to a bound from the data.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_min: Option<f64>,
    /// Statement checked by the verify command.
    #[arg(long, value_enum, default_value = "theorem1")]
    pub which: Which,
    /// Random flux samples per symmetry point.
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match commands::run(&config) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("qgraph: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
