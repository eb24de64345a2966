use clap::Parser;
use serde_json::json;

use blt_core::blt::{invert_params, toeplitz_coeffs, InverseBltParams, RegimeTag};
use blt_core::genfun::series_product_check;

use crate::io_util::{read_input, read_params, CliError};

#[derive(Parser)]
pub struct Args {
    /// Parameter JSON file, or `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: String,

    /// Sizes at which the product identity is checked
    #[arg(long, value_delimiter = ',', default_value = "1,2,7,64,256")]
    pub n: Vec<usize>,

    /// Tolerance applied to every residual
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    /// Expected inverse JSON (file or `-`) to compare against
    #[arg(long)]
    pub expect: Option<String>,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    if args.n.contains(&0) || args.n.is_empty() {
        return Err(CliError::Usage("--n sizes must be at least 1".into()));
    }
    let params = read_params(&args.input)?;
    let inverse = invert_params(&params)?;
    let inv_params = inverse.to_params();

    let mut pass = true;
    let mut product_residuals = Vec::new();
    for &n in &args.n {
        let c = toeplitz_coeffs(&params, n);
        let c_hat = toeplitz_coeffs(&inv_params, n);
        let mut identity = vec![0.0; n];
        identity[0] = 1.0;
        let dev = series_product_check(&c, &c_hat, &identity)?;
        pass &= dev <= args.tol;
        product_residuals.push(json!({ "n": n, "max_abs": dev }));
    }

    // Decay ordering: lambda_1 > lambda_hat_1 > lambda_2 > ... > lambda_hat_d.
    let mut chain = Vec::new();
    for (l, lh) in params.lambda().iter().zip(inverse.lambda_hat()) {
        chain.push(*l);
        chain.push(*lh);
    }
    let ordering_ok = chain.windows(2).all(|w| w[0] > w[1]);
    pass &= ordering_ok;

    let signs_ok = signs_consistent(&inverse);
    pass &= signs_ok;

    // sum(alpha_hat / lambda_hat) + prod(lambda) / prod(lambda_hat) = 1,
    // defined only when every inverse decay is nonzero.
    let pdf_identity_residual = if inverse.lambda_hat().iter().all(|&l| l != 0.0) {
        let ratio_sum: f64 = inverse
            .alpha_hat()
            .iter()
            .zip(inverse.lambda_hat())
            .map(|(a, l)| a / l)
            .sum();
        let prod_ratio =
            params.lambda().iter().product::<f64>() / inverse.lambda_hat().iter().product::<f64>();
        let residual = (ratio_sum + prod_ratio - 1.0).abs();
        pass &= residual <= args.tol;
        Some(residual)
    } else {
        None
    };

    let expect_max_dev = match &args.expect {
        Some(path) => {
            let text = read_input(path)?;
            let expected: InverseBltParams =
                serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
            let dev = param_deviation(&inverse, &expected);
            pass &= dev <= args.tol && expected.regime() == inverse.regime();
            Some(dev)
        }
        None => None,
    };

    let report = json!({
        "regime": inverse.regime().to_string(),
        "product_residuals": product_residuals,
        "ordering_ok": ordering_ok,
        "signs_ok": signs_ok,
        "pdf_identity_residual": pdf_identity_residual,
        "expect_max_dev": expect_max_dev,
        "pass": pass,
    });
    println!("{report}");
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(
            "one or more residuals exceed the tolerance".into(),
        ))
    }
}

fn signs_consistent(inverse: &InverseBltParams) -> bool {
    if !inverse.alpha_hat().iter().all(|&a| a < 0.0) {
        return false;
    }
    let lh = inverse.lambda_hat();
    match inverse.regime() {
        RegimeTag::Lt1 => lh.iter().all(|&l| l > 0.0 && l < 1.0),
        RegimeTag::Eq1 => {
            let zeros = lh.iter().filter(|&&l| l.abs() <= 1e-9).count();
            zeros == 1
                && lh
                    .iter()
                    .filter(|&&l| l.abs() > 1e-9)
                    .all(|&l| l > 0.0 && l < 1.0)
        }
        RegimeTag::Gt1 => {
            let negatives: Vec<f64> = lh.iter().copied().filter(|&l| l < 0.0).collect();
            negatives.len() == 1
                && negatives[0] > -1.0
                && lh
                    .iter()
                    .filter(|&&l| l >= 0.0)
                    .all(|&l| l > 0.0 && l < 1.0)
        }
    }
}

fn param_deviation(got: &InverseBltParams, want: &InverseBltParams) -> f64 {
    if got.d() != want.d() {
        return f64::INFINITY;
    }
    got.alpha_hat()
        .iter()
        .zip(want.alpha_hat())
        .chain(got.lambda_hat().iter().zip(want.lambda_hat()))
        .map(|(g, w)| (g - w).abs())
        .fold(0.0, f64::max)
}
