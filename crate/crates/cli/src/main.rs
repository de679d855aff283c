//! `roughacs`: generate almost complex structures, check integrability,
//! build holomorphic charts and verify them.

mod commands;

use clap::{Args, Parser, Subcommand};
use roughacs::AcsError;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "roughacs", version, about)]
struct Cli {
    /// Worker threads for the numerical kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a test structure (and its chart, for pullback data).
    Gen(GenArgs),
    /// Integrability residual, Nijenhuis tensor and norms of a structure.
    Check(CheckArgs),
    /// Build the chart F = G o H for a structure.
    Solve(SolveArgs),
    /// Check a chart against a structure (and optionally a reference chart).
    Verify(VerifyArgs),
    /// Norms of a field, e.g. `zygmund:0.6`, `sobolev:0.5:4`, `bmo`.
    Norms(NormsArgs),
    /// Planar Beltrami solve by Neumann series (n = 1).
    OracleBeltrami(OracleArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    /// pullback | random-holder | lipschitz-kink | constant | nonintegrable
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Samples per real axis (power of two, at least 8).
    #[arg(long = "N", default_value_t = 64)]
    pub size: usize,
    /// Period of the box.
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    pub period: f64,
    /// Hölder exponent for random-holder data.
    #[arg(long, default_value_t = 0.6)]
    pub r: f64,
    #[arg(long, default_value_t = 0.3)]
    pub amp: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cutoff radius as a fraction of the period.
    #[arg(long, default_value_t = 0.4)]
    pub radius: f64,
    /// Mollifier width (in grid spacings) applied before the cutoff.
    #[arg(long)]
    pub mollify: Option<f64>,
    /// Keep the structure periodic without localising it.
    #[arg(long)]
    pub no_cutoff: bool,
    /// Largest frequency of the pullback displacement.
    #[arg(long, default_value_t = 2)]
    pub modes: u32,
    /// Output ACSF file for the Beltrami matrix.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CheckArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Sup residual below which the structure is called integrable.
    #[arg(long, default_value_t = 1e-4)]
    pub threshold: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Homotopy steps.
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub newton_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub newton_max_iter: usize,
    /// dilate | scale
    #[arg(long, default_value = "dilate")]
    pub homotopy: String,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Relative residual below which the chart is called holomorphic.
    #[arg(long, default_value_t = 1e-4)]
    pub threshold: f64,
    /// Output directory for H, B, G and F.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Chart to verify (map ACSF file).
    #[arg(long)]
    pub coords: PathBuf,
    /// Beltrami matrix the chart should solve.
    #[arg(long)]
    pub structure: PathBuf,
    /// Reference chart for comparison up to biholomorphism.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Region radius for the comparison, as a fraction of the period.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Largest accepted relative residual.
    #[arg(long, default_value_t = 1e-4)]
    pub threshold: f64,
    /// Largest accepted chart comparison residual.
    #[arg(long, default_value_t = 1e-5)]
    pub compare_threshold: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct NormsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Norm specifications: zygmund:R, sobolev:S:P, bmo, lipschitz, sup, profile.
    pub specs: Vec<String>,
    /// Regularity triple to test against the standing hypotheses.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Failure carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn threshold(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<AcsError> for CliError {
    fn from(e: AcsError) -> Self {
        let code = match &e {
            AcsError::NoConvergence { .. }
            | AcsError::Continuation { .. }
            | AcsError::AdmissibilityLost { .. }
            | AcsError::SingularJacobian { .. }
            | AcsError::SingularFactor { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Check(a) => commands::check(a),
        Command::Solve(a) => commands::solve(a),
        Command::Verify(a) => commands::verify(a),
        Command::Norms(a) => commands::norms(a),
        Command::OracleBeltrami(a) => commands::oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
