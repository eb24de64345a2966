use clap::Parser;

use blt_core::loss::{max_loss, WorkloadSpec};
use blt_core::matrix::Mat;

use crate::io_util::{dense_cap, read_input, read_params, CliError, OutputFormat};

#[derive(Parser)]
pub struct Args {
    /// Parameter JSON file, or `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: String,

    /// Horizon for the prefix-sum workload
    #[arg(long, default_value_t = 64)]
    pub n: usize,

    /// CSV file with an explicit lower-triangular workload matrix
    /// (overrides --n)
    #[arg(long)]
    pub workload_file: Option<String>,

    /// Include per-row norms in the report
    #[arg(long)]
    pub per_row: bool,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

fn parse_workload_csv(text: &str, cap: usize) -> Result<Mat, CliError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse()).collect();
        let row = row.map_err(|e| CliError::Parse(format!("workload row {}: {e}", idx + 1)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse("workload file is empty".into()));
    }
    let n = rows.len();
    if n > cap {
        return Err(CliError::Core(blt_core::Error::SizeLimit { n, cap }));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Parse("workload matrix must be square".into()));
    }
    Ok(Mat::from_rows(rows))
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let params = read_params(&args.input)?;
    let workload = match &args.workload_file {
        Some(path) => {
            let matrix = parse_workload_csv(&read_input(path)?, dense_cap())?;
            WorkloadSpec::explicit(matrix)?
        }
        None => {
            if args.n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            WorkloadSpec::prefix_sum(args.n)
        }
    };
    let mut report = max_loss(&params, &workload)?;
    if !args.per_row {
        report.per_row_norms = None;
    }
    match args.format {
        OutputFormat::Json => {
            println!(
                "{}",
                serde_json::to_string(&report).expect("report serializes")
            );
        }
        OutputFormat::Csv => {
            println!("sensitivity,max_row_norm,loss,frobenius_loss");
            println!(
                "{},{},{},{}",
                report.sensitivity, report.max_row_norm, report.loss, report.frobenius_loss
            );
        }
    }
    Ok(())
}
