use clap::Parser;

use blt_core::blt::invert_params;

use crate::io_util::{read_params, CliError};

#[derive(Parser)]
pub struct Args {
    /// Parameter JSON file, or `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: String,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let params = read_params(&args.input)?;
    let inverse = invert_params(&params)?;
    println!(
        "{}",
        serde_json::to_string(&inverse).expect("inverse serializes")
    );
    Ok(())
}
