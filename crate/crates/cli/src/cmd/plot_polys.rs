use clap::Parser;

use blt_core::blt::{inversion_polynomials, regime_of, validate, ValidationMode};
use blt_core::poly::roots_bracketed;

use crate::io_util::{read_params, CliError};

#[derive(Parser)]
pub struct Args {
    /// Parameter JSON file, or `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: String,

    /// Evaluation grid `lo:hi:steps`
    #[arg(long, default_value = "0:10:201")]
    pub grid: String,
}

fn parse_grid(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let usage = || CliError::Usage(format!("bad grid {spec:?}; expected lo:hi:steps"));
    if parts.len() != 3 {
        return Err(usage());
    }
    let lo: f64 = parts[0].parse().map_err(|_| usage())?;
    let hi: f64 = parts[1].parse().map_err(|_| usage())?;
    let steps: usize = parts[2].parse().map_err(|_| usage())?;
    if !lo.is_finite() || !hi.is_finite() || hi <= lo || steps < 2 {
        return Err(usage());
    }
    Ok((lo, hi, steps))
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let (lo, hi, steps) = parse_grid(&args.grid)?;
    let params = read_params(&args.input)?;
    let report = validate(&params, ValidationMode::Strict);
    if !report.is_valid() {
        return Err(CliError::Core(blt_core::Error::InvalidParams(
            report.summary(),
        )));
    }
    let regime = regime_of(&params);
    let (p, q, r) = inversion_polynomials(&params, regime)?;

    // lambda is stored descending, so the poles mu = 1/lambda come out
    // ascending in the stored order.
    let mu: Vec<f64> = params.lambda().iter().map(|l| 1.0 / l).collect();
    let roots = roots_bracketed(&r, &mu, regime)?;

    println!("x,p,q,r");
    for k in 0..steps {
        let x = lo + (hi - lo) * (k as f64) / (steps - 1) as f64;
        println!("{x},{},{},{}", p.eval(x), q.eval(x), r.eval(x));
    }
    println!();
    println!("marker,index,x,p,r");
    for (i, &m) in mu.iter().enumerate() {
        println!("mu,{},{m},{},{}", i + 1, p.eval(m), r.eval(m));
    }
    for (i, &nu) in roots.roots().iter().enumerate() {
        println!("nu,{},{nu},{},{}", i + 1, p.eval(nu), r.eval(nu));
    }
    Ok(())
}
