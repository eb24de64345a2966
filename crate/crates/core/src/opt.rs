//! First-order optimization of BLT parameters.
//!
//! The search space is the strictly valid region with
//! `sum_i alpha_i / lambda_i < 1`: staying in that regime keeps every
//! iterate invertible with all-positive inverse decays and keeps the
//! objective differentiable. The constraints are enforced with a log
//! barrier whose weight decays geometrically, so late iterations descend
//! the raw objective:
//!
//! ```text
//! barrier = -[ sum log(alpha_i) + sum log(lambda_i) + sum log(1 - lambda_i)
//!            + log(1 - sum alpha_i) + log(1 - sum alpha_i / lambda_i)
//!            + sum_{i<j} log(lambda_i - lambda_j) ]
//! ```
//!
//! The update is momentum gradient descent with a fixed step; a step that
//! would leave the feasible region is halved until it does not. The best
//! strictly valid iterate seen (by raw objective) is returned.

use std::io::{self, Write};

use serde::Serialize;

use crate::blt::{invert_params, validate, BltParams, InverseBltParams, RegimeTag, ValidationMode};
use crate::diff::objective_value_and_gradient;
use crate::error::{Error, Result};
use crate::loss::{Objective, WorkloadSpec};
use crate::rng::CounterRng;

const MOMENTUM: f64 = 0.9;
const MAX_BACKTRACKS: usize = 60;
/// Feasibility margin on decay gaps, slightly above the duplicate threshold.
const GAP_FLOOR: f64 = 1e-9;

/// Starting point selection.
#[derive(Clone, Debug)]
pub enum Init {
    /// Log-spaced decays with uniform scales, jittered by the seed.
    Random,
    /// Explicit strictly valid `LT1` parameters.
    Given(BltParams),
}

/// Optimizer configuration.
#[derive(Clone, Debug)]
pub struct OptConfig {
    /// BLT degree.
    pub d: usize,
    /// Horizon (prefix-sum workload size).
    pub n: usize,
    /// Row-norm summary to minimize.
    pub objective: Objective,
    /// Initial barrier weight.
    pub barrier_weight: f64,
    /// Geometric decay factor applied to the barrier weight per step.
    pub barrier_decay: f64,
    /// Iteration budget.
    pub steps: usize,
    /// Step size.
    pub learning_rate: f64,
    /// Seed for the jittered initialization.
    pub seed: u64,
    /// Starting point.
    pub init: Init,
    /// Parameter snapshots are stored every this many records.
    pub trace_every: usize,
}

impl OptConfig {
    /// Defaults: max objective, 2000 steps, step size `0.1 / sqrt(n)` (the
    /// loss and its gradients grow with the horizon), barrier weight `1e-3`
    /// decaying by `0.99` per step.
    pub fn new(d: usize, n: usize) -> Self {
        Self {
            d,
            n,
            objective: Objective::Max,
            barrier_weight: 1e-3,
            barrier_decay: 0.99,
            steps: 2000,
            learning_rate: 0.1 / (n as f64).sqrt(),
            seed: 0,
            init: Init::Random,
            trace_every: 1,
        }
    }
}

/// One trace record; `params` is populated every `trace_every` records and
/// on the final record.
#[derive(Clone, Debug, Serialize)]
pub struct OptRecord {
    pub iter: usize,
    /// Raw objective value (no barrier).
    pub loss: f64,
    /// Unweighted barrier value.
    pub barrier: f64,
    /// Euclidean norm of the descended gradient (objective plus weighted
    /// barrier).
    pub grad_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<BltParams>,
}

/// Per-iteration history of one optimization run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct OptTrace {
    pub records: Vec<OptRecord>,
}

impl OptTrace {
    /// Writes one JSON object per line, one line per record.
    pub fn to_json_lines<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut *w, record)?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Gradient norm of the last record.
    pub fn final_grad_norm(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.grad_norm)
    }
}

fn barrier_terms(alpha: &[f64], lambda: &[f64]) -> Option<Vec<f64>> {
    let d = alpha.len();
    let mut terms = Vec::with_capacity(3 * d + 2 + d * (d - 1) / 2);
    terms.extend_from_slice(alpha);
    terms.extend_from_slice(lambda);
    terms.extend(lambda.iter().map(|l| 1.0 - l));
    terms.push(1.0 - alpha.iter().sum::<f64>());
    terms.push(1.0 - alpha.iter().zip(lambda).map(|(a, l)| a / l).sum::<f64>());
    for i in 0..d {
        for j in (i + 1)..d {
            terms.push(lambda[i] - lambda[j]);
        }
    }
    if terms.iter().all(|&t| t > GAP_FLOOR) {
        Some(terms)
    } else {
        None
    }
}

fn feasible(alpha: &[f64], lambda: &[f64]) -> bool {
    barrier_terms(alpha, lambda).is_some()
}

fn barrier_value(alpha: &[f64], lambda: &[f64]) -> f64 {
    match barrier_terms(alpha, lambda) {
        Some(terms) => -terms.iter().map(|t| t.ln()).sum::<f64>(),
        None => f64::INFINITY,
    }
}

/// Gradient of the unweighted barrier in `(alpha, lambda)` coordinates.
fn barrier_gradient(alpha: &[f64], lambda: &[f64]) -> Vec<f64> {
    let d = alpha.len();
    let slack_sum = 1.0 - alpha.iter().sum::<f64>();
    let slack_ratio = 1.0 - alpha.iter().zip(lambda).map(|(a, l)| a / l).sum::<f64>();
    let mut grad = vec![0.0; 2 * d];
    for j in 0..d {
        grad[j] = -(1.0 / alpha[j] - 1.0 / slack_sum - 1.0 / (lambda[j] * slack_ratio));
        let mut pair_sum = 0.0;
        for k in 0..d {
            if k != j {
                pair_sum += 1.0 / (lambda[j] - lambda[k]);
            }
        }
        grad[d + j] = -(1.0 / lambda[j] - 1.0 / (1.0 - lambda[j])
            + alpha[j] / (lambda[j] * lambda[j] * slack_ratio)
            + pair_sum);
    }
    grad
}

/// Decays whose effective averaging windows `1 / (1 - lambda_i)` are
/// log-spaced up to the horizon, with small uniform scales, jittered by the
/// seed and rescaled into the feasible region. Multi-scale starts of this
/// shape sit in the basin of the good optima for prefix-sum workloads.
fn default_init(d: usize, n: usize, seed: u64) -> BltParams {
    let mut rng = CounterRng::new(seed);
    let mut lambda: Vec<f64> = (1..=d)
        .map(|i| {
            let window = (n as f64).powf(i as f64 / d as f64);
            let jitter = 1.0 + 0.02 * (rng.uniform() - 0.5);
            (1.0 - jitter / window).clamp(1e-4, 1.0 - 1e-4)
        })
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    // Clamping can collapse neighbors; push duplicates down.
    for i in 1..d {
        if lambda[i] >= lambda[i - 1] - 1e-6 {
            lambda[i] = lambda[i - 1] * 0.9;
        }
    }
    let mut alpha: Vec<f64> = (0..d)
        .map(|_| (0.2 / d as f64) * (1.0 + 0.02 * (rng.uniform() - 0.5)))
        .collect();
    // Keep the starting point clear of the sum constraints.
    let ratio_sum: f64 = alpha.iter().zip(&lambda).map(|(a, l)| a / l).sum();
    if ratio_sum >= 0.9 {
        let scale = 0.9 / ratio_sum;
        for a in &mut alpha {
            *a *= scale;
        }
    }
    let alpha_sum: f64 = alpha.iter().sum();
    if alpha_sum >= 0.9 {
        let scale = 0.9 / alpha_sum;
        for a in &mut alpha {
            *a *= scale;
        }
    }
    BltParams::new(alpha, lambda).expect("constructed parameters are finite")
}

fn check_init(params: &BltParams) -> Result<()> {
    let report = validate(params, ValidationMode::Strict);
    if !report.is_valid() {
        return Err(Error::InitInvalid(report.summary()));
    }
    if report.regime != Some(RegimeTag::Lt1) {
        return Err(Error::InitInvalid(format!(
            "initial point must be in regime LT1, got {}",
            report
                .regime
                .map_or_else(|| "none".into(), |r| r.to_string())
        )));
    }
    if !feasible(params.alpha(), params.lambda()) {
        return Err(Error::InitInvalid(
            "initial point is on the barrier boundary".into(),
        ));
    }
    Ok(())
}

/// Minimizes the objective over strictly valid `LT1` parameters.
///
/// Returns the best iterate seen, its inverse, and the iteration trace.
/// Deterministic for a fixed configuration.
pub fn optimize(cfg: &OptConfig) -> Result<(BltParams, InverseBltParams, OptTrace)> {
    assert!(
        cfg.d >= 1 && cfg.n >= 1,
        "degree and horizon must be positive"
    );
    let params = match &cfg.init {
        Init::Given(p) => p.clone(),
        Init::Random => default_init(cfg.d, cfg.n, cfg.seed),
    };
    check_init(&params)?;
    let workload = WorkloadSpec::prefix_sum(cfg.n);
    let d = cfg.d;

    let mut alpha = params.alpha().to_vec();
    let mut lambda = params.lambda().to_vec();
    let mut velocity = vec![0.0; 2 * d];
    let mut weight = cfg.barrier_weight;
    let mut trace = OptTrace::default();
    let mut best: Option<(f64, BltParams)> = None;

    let evaluate = |a: &[f64], l: &[f64]| -> Result<(BltParams, f64, Vec<f64>)> {
        let p = BltParams::new(a.to_vec(), l.to_vec())?;
        let (value, grad) = objective_value_and_gradient(&p, &workload, cfg.objective)?;
        Ok((p, value, grad))
    };
    // The initial point must evaluate; later failures trigger backtracking.
    let (mut current, mut loss_val, mut loss_grad) = evaluate(&alpha, &lambda)
        .map_err(|e| Error::InitInvalid(format!("initial point does not evaluate: {e}")))?;

    for iter in 0..=cfg.steps {
        let barrier = barrier_value(&alpha, &lambda);
        let barrier_grad = barrier_gradient(&alpha, &lambda);
        let grad: Vec<f64> = loss_grad
            .iter()
            .zip(&barrier_grad)
            .map(|(l, b)| l + weight * b)
            .collect();
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !loss_val.is_finite() || !grad_norm.is_finite() {
            return Err(Error::NonFinite { iter });
        }

        if best.as_ref().is_none_or(|(b, _)| loss_val < *b) {
            best = Some((loss_val, current.clone()));
        }
        let snapshot = iter.is_multiple_of(cfg.trace_every.max(1)) || iter == cfg.steps;
        trace.records.push(OptRecord {
            iter,
            loss: loss_val,
            barrier,
            grad_norm,
            params: snapshot.then(|| current.clone()),
        });
        if iter == cfg.steps {
            break;
        }

        for (v, g) in velocity.iter_mut().zip(&grad) {
            *v = MOMENTUM * *v - cfg.learning_rate * g;
        }
        // Accept the candidate only if it is feasible and evaluates cleanly;
        // otherwise halve the velocity (a step deep into the near-degenerate
        // zone can make root finding fail even inside the barrier).
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let cand_alpha: Vec<f64> = alpha
                .iter()
                .zip(&velocity[..d])
                .map(|(a, v)| a + v)
                .collect();
            let cand_lambda: Vec<f64> = lambda
                .iter()
                .zip(&velocity[d..])
                .map(|(l, v)| l + v)
                .collect();
            if feasible(&cand_alpha, &cand_lambda) {
                if let Ok((p, value, grad)) = evaluate(&cand_alpha, &cand_lambda) {
                    alpha = cand_alpha;
                    lambda = cand_lambda;
                    current = p;
                    loss_val = value;
                    loss_grad = grad;
                    accepted = true;
                    break;
                }
            }
            for v in &mut velocity {
                *v *= 0.5;
            }
        }
        if !accepted {
            velocity.iter_mut().for_each(|v| *v = 0.0);
        }
        weight *= cfg.barrier_decay;
    }

    let (_, best_params) = best.expect("at least the initial iterate was evaluated");
    let inverse = invert_params(&best_params)?;
    Ok((best_params, inverse, trace))
}
