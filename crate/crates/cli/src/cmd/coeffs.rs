use clap::Parser;
use serde_json::json;

use blt_core::blt::{invert_params, toeplitz_coeffs};

use crate::io_util::{read_params, CliError, OutputFormat};

#[derive(Parser)]
pub struct Args {
    /// Parameter JSON file, or `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: String,

    /// Number of coefficients to print
    #[arg(long, default_value_t = 16)]
    pub n: usize,

    /// Print the coefficients of the inverse instead
    #[arg(long)]
    pub inverse: bool,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let params = read_params(&args.input)?;
    let coeffs = if args.inverse {
        toeplitz_coeffs(&invert_params(&params)?.to_params(), args.n)
    } else {
        toeplitz_coeffs(&params, args.n)
    };
    match args.format {
        OutputFormat::Json => {
            println!(
                "{}",
                json!({ "n": args.n, "inverse": args.inverse, "coeffs": coeffs })
            );
        }
        OutputFormat::Csv => {
            println!("t,c");
            for (t, c) in coeffs.iter().enumerate() {
                println!("{},{}", t + 1, c);
            }
        }
    }
    Ok(())
}
