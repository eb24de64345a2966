//! Sensitivity and factorization loss for noise-generating matrices.
//!
//! For a workload `A = B C` released through the correlated noise mechanism,
//! the per-round error is governed by `B Z` with `B = A C^-1`, so the figure
//! of merit is `sens(C)` (largest column norm of `C`, the single-participation
//! L2 sensitivity) times the largest row norm of `A C^-1`. The Frobenius
//! variant replaces the worst row by the root-mean-square row.
//!
//! `B` rows are never materialized for the prefix-sum workload: because
//! `C^-1` is Toeplitz, the rows of `A_pre C^-1` are running sums of the
//! inverse coefficient column, and all row norms come out of one `O(n d)`
//! streaming pass. Explicit lower-triangular workloads fall back to a
//! per-row triangular solve, `O(n^2 d)` total.

use serde::Serialize;

use crate::blt::{toeplitz_coeffs, BltParams};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::stream::StreamState;

/// Workload matrix selection.
#[derive(Clone, Debug)]
pub enum WorkloadSpec {
    /// The all-ones lower-triangular matrix (SGD prefix sums).
    PrefixSum {
        /// Matrix side length.
        n: usize,
    },
    /// An explicit lower-triangular matrix with nonzero diagonal.
    Explicit(Mat),
}

impl WorkloadSpec {
    /// Prefix-sum workload of size `n`.
    pub fn prefix_sum(n: usize) -> Self {
        assert!(n >= 1, "n must be at least 1");
        WorkloadSpec::PrefixSum { n }
    }

    /// Explicit workload; must be square, lower-triangular, and invertible.
    pub fn explicit(matrix: Mat) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() == 0 {
            return Err(Error::SingularWorkload(format!(
                "workload must be square and non-empty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        for i in 0..matrix.rows() {
            for j in (i + 1)..matrix.cols() {
                if matrix[(i, j)] != 0.0 {
                    return Err(Error::SingularWorkload(format!(
                        "workload must be lower-triangular; entry ({i}, {j}) is nonzero"
                    )));
                }
            }
            if matrix[(i, i)] == 0.0 {
                return Err(Error::SingularWorkload(format!(
                    "workload diagonal entry {i} is zero"
                )));
            }
        }
        Ok(WorkloadSpec::Explicit(matrix))
    }

    /// Side length of the workload.
    pub fn n(&self) -> usize {
        match self {
            WorkloadSpec::PrefixSum { n } => *n,
            WorkloadSpec::Explicit(m) => m.rows(),
        }
    }
}

/// Which row-norm summary the optimizer targets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    /// Worst row norm (the max loss).
    Max,
    /// Root-mean-square row norm.
    Frobenius,
    /// Log-sum-exp smoothing of the row norms at the given temperature;
    /// upper-bounds the max and converges to it as the temperature drops.
    SoftMax(f64),
}

/// Loss summary for a (workload, BLT) pair.
#[derive(Clone, Debug, Serialize)]
pub struct LossReport {
    /// Largest column norm of `C`.
    pub sensitivity: f64,
    /// Largest row norm of `B = A C^-1`.
    pub max_row_norm: f64,
    /// `sensitivity * max_row_norm`.
    pub loss: f64,
    /// `sensitivity *` root-mean-square row norm.
    pub frobenius_loss: f64,
    /// Row norms of `B`, in row order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_row_norms: Option<Vec<f64>>,
}

/// Squared column norms of a lower-triangular Toeplitz matrix are nested
/// sums of squares of the coefficient column, so the maximum is a running
/// maximum over prefixes.
pub(crate) fn sensitivity_squared(coeffs: &[f64]) -> f64 {
    let mut acc = 0.0f64;
    let mut best = 0.0f64;
    for &c in coeffs {
        acc += c * c;
        best = best.max(acc);
    }
    best
}

/// Largest column norm of the `n x n` BLT matrix, in `O(n d)`.
pub fn sensitivity(params: &BltParams, n: usize) -> f64 {
    sensitivity_squared(&toeplitz_coeffs(params, n)).sqrt()
}

/// First column of `C^-1` by streaming an impulse through the solver.
pub(crate) fn inverse_coeffs_streaming(params: &BltParams, n: usize) -> Vec<f64> {
    let mut state = StreamState::new(params, 1);
    let mut coeffs = Vec::with_capacity(n);
    coeffs.push(state.step_solve(&[1.0]).expect("width 1")[0]);
    for _ in 1..n {
        coeffs.push(state.step_solve(&[0.0]).expect("width 1")[0]);
    }
    coeffs
}

/// Squared row norms of `B = A C^-1` for the prefix-sum workload, from the
/// inverse coefficient column: `B` is Toeplitz with first column the running
/// sums `g`, so row `t` has squared norm `g_1^2 + ... + g_t^2`.
pub(crate) fn prefix_row_norms_sq(inverse_coeffs: &[f64]) -> Vec<f64> {
    let mut acc_g = 0.0;
    let mut acc_sq = 0.0;
    inverse_coeffs
        .iter()
        .map(|&c| {
            acc_g += c;
            acc_sq += acc_g * acc_g;
            acc_sq
        })
        .collect()
}

/// Row `t` of `B = A C^-1` for an explicit workload, by solving
/// `C^T z = a_t` backward with the channel buffers run in reverse.
fn explicit_b_row(params: &BltParams, a_row: &[f64], t: usize) -> Vec<f64> {
    let d = params.d();
    let mut z = vec![0.0; a_row.len()];
    let mut bufs = vec![0.0; d];
    for s in (0..=t).rev() {
        let read: f64 = params.alpha().iter().zip(&bufs).map(|(a, b)| a * b).sum();
        let value = a_row[s] - read;
        z[s] = value;
        for (buf, l) in bufs.iter_mut().zip(params.lambda()) {
            *buf = l * *buf + value;
        }
    }
    z
}

/// Squared row norms of `B = A C^-1` for any workload.
pub(crate) fn b_row_norms_sq(params: &BltParams, workload: &WorkloadSpec) -> Vec<f64> {
    match workload {
        WorkloadSpec::PrefixSum { n } => prefix_row_norms_sq(&inverse_coeffs_streaming(params, *n)),
        WorkloadSpec::Explicit(a) => (0..a.rows())
            .map(|t| {
                explicit_b_row(params, a.row(t), t)
                    .iter()
                    .map(|z| z * z)
                    .sum()
            })
            .collect(),
    }
}

/// Max loss `sens(C) * rownorm(A C^-1)` together with its ingredients.
pub fn max_loss(params: &BltParams, workload: &WorkloadSpec) -> Result<LossReport> {
    let n = workload.n();
    let sens_sq = sensitivity_squared(&toeplitz_coeffs(params, n));
    let row_sq = b_row_norms_sq(params, workload);
    let max_sq = row_sq.iter().copied().fold(0.0, f64::max);
    let mean_sq = row_sq.iter().sum::<f64>() / n as f64;
    Ok(LossReport {
        sensitivity: sens_sq.sqrt(),
        max_row_norm: max_sq.sqrt(),
        loss: (sens_sq * max_sq).sqrt(),
        frobenius_loss: (sens_sq * mean_sq).sqrt(),
        per_row_norms: Some(row_sq.iter().map(|r| r.sqrt()).collect()),
    })
}

/// Frobenius variant: `sens(C)` times the root-mean-square row norm.
pub fn frobenius_loss(params: &BltParams, workload: &WorkloadSpec) -> Result<f64> {
    Ok(max_loss(params, workload)?.frobenius_loss)
}

/// Value of an [`Objective`] for a (workload, BLT) pair.
pub fn objective(params: &BltParams, workload: &WorkloadSpec, objective: Objective) -> Result<f64> {
    let sens_sq = sensitivity_squared(&toeplitz_coeffs(params, workload.n()));
    let row_sq = b_row_norms_sq(params, workload);
    Ok(objective_value(sens_sq, &row_sq, objective))
}

/// Scalar objective value from the squared sensitivity and squared row norms.
pub(crate) fn objective_value(sens_sq: f64, row_norms_sq: &[f64], objective: Objective) -> f64 {
    match objective {
        Objective::Max => {
            let max_sq = row_norms_sq.iter().copied().fold(0.0, f64::max);
            (sens_sq * max_sq).sqrt()
        }
        Objective::Frobenius => {
            let mean_sq = row_norms_sq.iter().sum::<f64>() / row_norms_sq.len() as f64;
            (sens_sq * mean_sq).sqrt()
        }
        Objective::SoftMax(temperature) => {
            let norms: Vec<f64> = row_norms_sq.iter().map(|r| r.sqrt()).collect();
            let peak = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = peak
                + temperature
                    * norms
                        .iter()
                        .map(|m| ((m - peak) / temperature).exp())
                        .sum::<f64>()
                        .ln();
            sens_sq.sqrt() * lse
        }
    }
}
