//! `blt` — command-line front end for BLT matrices.
//!
//! Every command reads parameter JSON (`{"alpha": [...], "lambda": [...]}`)
//! from a file or stdin, writes the machine-readable payload to stdout, and
//! keeps diagnostics on stderr. Exit codes: 0 success, 1 input parse error,
//! 2 invalid parameters or flags, 3 numerical failure.

mod cmd;
mod io_util;

use clap::{Parser, Subcommand};

use crate::io_util::CliError;

#[derive(Parser)]
#[command(
    name = "blt",
    version,
    about = "Buffered linear Toeplitz matrices: inversion, verification, noise streaming, and optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the parameters of the inverse BLT
    Invert(cmd::invert::Args),
    /// Invert and check the result end to end, reporting residuals
    Verify(cmd::verify::Args),
    /// Print Toeplitz coefficients of a BLT or of its inverse
    Coeffs(cmd::coeffs::Args),
    /// Sensitivity and factorization loss for a workload
    Loss(cmd::loss::Args),
    /// Optimize BLT parameters for a prefix-sum horizon
    Optimize(cmd::optimize::Args),
    /// Stream seeded correlated noise rows
    StreamDemo(cmd::stream_demo::Args),
    /// Tabulate the inversion polynomials on a grid with root markers
    PlotPolys(cmd::plot_polys::Args),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Invert(args) => cmd::invert::run(&args),
        Command::Verify(args) => cmd::verify::run(&args),
        Command::Coeffs(args) => cmd::coeffs::run(&args),
        Command::Loss(args) => cmd::loss::run(&args),
        Command::Optimize(args) => cmd::optimize::run(&args),
        Command::StreamDemo(args) => cmd::stream_demo::run(&args),
        Command::PlotPolys(args) => cmd::plot_polys::run(&args),
    };
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        use blt_core::Error as E;
        match self {
            CliError::Io(_) | CliError::Parse(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Core(e) => match e {
                E::InvalidParams(_)
                | E::DimensionMismatch { .. }
                | E::DuplicateDecay { .. }
                | E::InterlacingViolation { .. }
                | E::DegenerateDecays(_)
                | E::SizeLimit { .. }
                | E::SingularWorkload(_)
                | E::ZeroDecay { .. }
                | E::InitInvalid(_)
                | E::LengthMismatch { .. }
                | E::DegenerateRegime
                | E::PerturbationInvalid(_) => 2,
                _ => 3,
            },
        }
    }
}
