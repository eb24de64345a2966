use std::fs::File;
use std::io::BufWriter;

use clap::Parser;
use serde_json::json;

use blt_core::loss::Objective;
use blt_core::opt::{optimize, Init, OptConfig};

use crate::io_util::{read_params, CliError};

#[derive(Parser)]
pub struct Args {
    /// BLT degree
    #[arg(long)]
    pub d: usize,

    /// Prefix-sum horizon
    #[arg(long)]
    pub n: usize,

    /// Objective: `max`, `frobenius`, or `softmax:<temperature>`
    #[arg(long, default_value = "max")]
    pub objective: String,

    /// Iteration budget (default: the configuration default)
    #[arg(long)]
    pub steps: Option<usize>,

    /// Step size (default: scale-normalized by the horizon)
    #[arg(long)]
    pub lr: Option<f64>,

    /// Initial barrier weight
    #[arg(long)]
    pub barrier_weight: Option<f64>,

    /// Geometric barrier decay per step
    #[arg(long)]
    pub barrier_decay: Option<f64>,

    /// Seed for the jittered initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Start from these parameters instead of the built-in initialization
    #[arg(long)]
    pub init: Option<String>,

    /// Write the iteration trace as JSON lines to this file
    #[arg(long)]
    pub trace: Option<String>,

    /// Keep a parameter snapshot every this many iterations
    #[arg(long, default_value_t = 1)]
    pub trace_every: usize,
}

fn parse_objective(text: &str) -> Result<Objective, CliError> {
    match text {
        "max" => Ok(Objective::Max),
        "frobenius" => Ok(Objective::Frobenius),
        other => match other.strip_prefix("softmax:") {
            Some(temp) => {
                let t: f64 = temp
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad softmax temperature {temp:?}")))?;
                if t <= 0.0 {
                    return Err(CliError::Usage(
                        "softmax temperature must be positive".into(),
                    ));
                }
                Ok(Objective::SoftMax(t))
            }
            None => Err(CliError::Usage(format!(
                "unknown objective {other:?}; use max, frobenius, or softmax:<t>"
            ))),
        },
    }
}

pub fn run(args: &Args) -> Result<(), CliError> {
    if args.d == 0 || args.n == 0 {
        return Err(CliError::Usage("--d and --n must be at least 1".into()));
    }
    let mut cfg = OptConfig::new(args.d, args.n);
    cfg.objective = parse_objective(&args.objective)?;
    cfg.seed = args.seed;
    cfg.trace_every = args.trace_every.max(1);
    if let Some(steps) = args.steps {
        cfg.steps = steps;
    }
    if let Some(lr) = args.lr {
        cfg.learning_rate = lr;
    }
    if let Some(w) = args.barrier_weight {
        cfg.barrier_weight = w;
    }
    if let Some(decay) = args.barrier_decay {
        cfg.barrier_decay = decay;
    }
    if let Some(path) = &args.init {
        cfg.init = Init::Given(read_params(path)?);
    }

    let objective = cfg.objective;
    let (params, inverse, trace) = optimize(&cfg)?;
    if let Some(path) = &args.trace {
        let mut file = BufWriter::new(File::create(path)?);
        trace.to_json_lines(&mut file)?;
    }
    let workload = blt_core::loss::WorkloadSpec::prefix_sum(args.n);
    let final_loss = blt_core::loss::objective(&params, &workload, objective)?;
    println!(
        "{}",
        json!({
            "params": params,
            "inverse": inverse,
            "loss": final_loss,
            "grad_norm": trace.final_grad_norm(),
            "iterations": trace.records.len().saturating_sub(1),
        })
    );
    Ok(())
}
