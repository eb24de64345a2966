use std::fs::File;
use std::io::BufWriter;

use clap::Parser;
use serde_json::json;

use blt_core::blt::invert_params;
use blt_core::loss::sensitivity;
use blt_core::stream::{noise_rows, write_rows, NoiseConfig};

use crate::io_util::{read_params, CliError, OutputFormat};

#[derive(Parser)]
pub struct Args {
    /// Parameter JSON file, or `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: String,

    /// Number of noise rows to emit
    #[arg(long, default_value_t = 16)]
    pub steps: usize,

    /// Width of each row
    #[arg(long, default_value_t = 1)]
    pub m: usize,

    /// Noise multiplier (mutually exclusive with --rho)
    #[arg(long, conflicts_with = "rho")]
    pub sigma: Option<f64>,

    /// zCDP budget; sets sigma^2 = 1 / (2 rho)
    #[arg(long)]
    pub rho: Option<f64>,

    /// L2 sensitivity scaling the raw noise (default: the sensitivity of the
    /// matrix at the requested horizon)
    #[arg(long)]
    pub sensitivity: Option<f64>,

    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Also write the rows as a binary dump to this file
    #[arg(long)]
    pub dump: Option<String>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    if args.steps == 0 || args.m == 0 {
        return Err(CliError::Usage("--steps and --m must be at least 1".into()));
    }
    let params = read_params(&args.input)?;
    let inverse = invert_params(&params)?;
    let sens = args
        .sensitivity
        .unwrap_or_else(|| sensitivity(&params, args.steps));
    let cfg = match (args.sigma, args.rho) {
        (Some(sigma), None) => NoiseConfig::new(sigma, sens, args.seed, args.m)?,
        (None, Some(rho)) => NoiseConfig::from_rho(rho, sens, args.seed, args.m)?,
        (None, None) => NoiseConfig::new(1.0, sens, args.seed, args.m)?,
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };

    let rows: Vec<Vec<f64>> = noise_rows(&inverse, &cfg, args.steps).collect();
    if let Some(path) = &args.dump {
        let mut file = BufWriter::new(File::create(path)?);
        write_rows(&mut file, &rows)?;
    }
    match args.format {
        OutputFormat::Json => {
            println!(
                "{}",
                json!({
                    "sigma": cfg.sigma,
                    "sensitivity": cfg.sensitivity,
                    "seed": cfg.seed,
                    "rows": rows,
                })
            );
        }
        OutputFormat::Csv => {
            for row in &rows {
                let line: Vec<String> = row.iter().map(f64::to_string).collect();
                println!("{}", line.join(","));
            }
        }
    }
    Ok(())
}
