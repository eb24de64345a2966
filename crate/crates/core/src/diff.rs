//! Exact derivatives of the inversion map and of the loss.
//!
//! The map `(alpha, lambda) -> (alpha_hat, lambda_hat)` is continuously
//! differentiable wherever the roots of `r` are simple. Rather than pushing
//! derivatives through the eigensolver, this module differentiates the root
//! conditions implicitly: at a root `nu_i` of `r(x; alpha, lambda)`,
//!
//! ```text
//! d nu_i / d theta = -(dr/dtheta)(nu_i) / r'(nu_i),
//! ```
//!
//! which is mathematically the same map the eigensolver computes. The decay
//! derivatives follow from `lambda_hat_i = 1 / nu_i` and the scale
//! derivatives from the log-derivative of the closed product formula. A
//! central finite-difference Jacobian is kept alongside as the oracle.

use crate::blt::{
    invert_params, inversion_polynomials, regime_of, toeplitz_coeffs, validate, BltParams,
    RegimeTag, ValidationMode,
};
use crate::error::{Error, Result};
use crate::loss::{self, Objective, WorkloadSpec};
use crate::matrix::Mat;
use crate::poly::{self, EPS_SEP};

/// How a Jacobian was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMethod {
    /// Implicit differentiation of the root conditions.
    Implicit,
    /// Central finite differences of the full inversion.
    FiniteDifference,
}

/// Jacobian of the inversion map, a `2d x 2d` matrix.
///
/// Rows are ordered `(alpha_hat_1 .. alpha_hat_d, lambda_hat_1 .. lambda_hat_d)`
/// and columns `(alpha_1 .. alpha_d, lambda_1 .. lambda_d)`, both in the
/// canonical descending-decay order.
#[derive(Clone, Debug)]
pub struct InversionJacobian {
    /// The derivative matrix.
    pub matrix: Mat,
    /// Method that produced it.
    pub method: JacobianMethod,
}

impl InversionJacobian {
    /// Largest entrywise deviation from another Jacobian, relative to the
    /// larger of 1 and this Jacobian's largest entry.
    pub fn relative_deviation(&self, other: &InversionJacobian) -> f64 {
        let scale = (0..self.matrix.rows())
            .flat_map(|i| self.matrix.row(i).iter().copied())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        self.matrix.max_abs_diff(&other.matrix) / scale
    }
}

fn require_nondegenerate(params: &BltParams) -> Result<RegimeTag> {
    let report = validate(params, ValidationMode::Strict);
    if !report.is_valid() {
        return Err(Error::InvalidParams(report.summary()));
    }
    match report.regime.expect("strict validation reports a regime") {
        RegimeTag::Eq1 => Err(Error::DegenerateRegime),
        regime => Ok(regime),
    }
}

/// `prod_{k != skip} (1 - lambda_k x)`.
fn factor_product_except(lambda: &[f64], skip: usize, x: f64) -> f64 {
    lambda
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != skip)
        .map(|(_, &l)| 1.0 - l * x)
        .product()
}

/// `dr/dalpha_j` evaluated at `x`: the only alpha_j-dependent term of
/// `r = q + x p` is `x alpha_j prod_{k != j} (1 - lambda_k x)`.
fn dr_dalpha(lambda: &[f64], j: usize, x: f64) -> f64 {
    x * factor_product_except(lambda, j, x)
}

/// `dr/dlambda_j` evaluated at `x`, from the product rule on `q` and `p`.
fn dr_dlambda(alpha: &[f64], lambda: &[f64], j: usize, x: f64) -> f64 {
    let dq = -x * factor_product_except(lambda, j, x);
    let mut dp = 0.0;
    for (i, &a) in alpha.iter().enumerate() {
        if i == j {
            continue;
        }
        let prod: f64 = lambda
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i && k != j)
            .map(|(_, &l)| 1.0 - l * x)
            .product();
        dp += a * prod;
    }
    dq - x * x * dp
}

/// Jacobian by implicit differentiation of the root conditions.
///
/// Requires a strictly valid input in regime `LT1` or `GT1`; the degenerate
/// regime has a zero inverse decay where the scale formula is not
/// differentiable in this parameterization.
pub fn jacobian_implicit(params: &BltParams) -> Result<InversionJacobian> {
    let regime = require_nondegenerate(params)?;
    let d = params.d();
    let alpha = params.alpha();
    let lambda = params.lambda();

    let (_, _, r) = inversion_polynomials(params, regime)?;
    let roots = poly::roots_companion(&r).map_err(|e| Error::InversionFailure(Box::new(e)))?;
    let scale = r.coeff_scale();

    // Root sensitivities, then decay sensitivities lambda_hat = 1 / nu.
    let mut entries: Vec<(f64, Vec<f64>)> = Vec::with_capacity(d);
    for &nu in roots.roots() {
        let (_, r_deriv) = r.eval_with_deriv(nu);
        if r_deriv.abs() < EPS_SEP * scale {
            return Err(Error::NearDoubleRoot(r_deriv.abs()));
        }
        let mut dlh = vec![0.0; 2 * d];
        for j in 0..d {
            let dnu_da = -dr_dalpha(lambda, j, nu) / r_deriv;
            let dnu_dl = -dr_dlambda(alpha, lambda, j, nu) / r_deriv;
            dlh[j] = -dnu_da / (nu * nu);
            dlh[d + j] = -dnu_dl / (nu * nu);
        }
        entries.push((1.0 / nu, dlh));
    }
    // Canonical descending order of the inverse decays.
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    let lambda_hat: Vec<f64> = entries.iter().map(|(l, _)| *l).collect();
    let dlh: Vec<&Vec<f64>> = entries.iter().map(|(_, row)| row).collect();

    for (i, &lh) in lambda_hat.iter().enumerate() {
        for (j, &l) in lambda.iter().enumerate() {
            if (lh - l).abs() <= EPS_SEP {
                return Err(Error::DegenerateDecays(format!(
                    "lambda_hat[{i}] and lambda[{j}] are separated by only {:e}",
                    (lh - l).abs()
                )));
            }
        }
    }

    // Scales and their derivatives via the log-derivative of
    // alpha_hat_i = prod_j (lh_i - l_j) / prod_{j != i} (lh_i - lh_j).
    let mut jac = Mat::zeros(2 * d, 2 * d);
    for i in 0..d {
        let num: f64 = lambda.iter().map(|&l| lambda_hat[i] - l).product();
        let den: f64 = (0..d)
            .filter(|&j| j != i)
            .map(|j| lambda_hat[i] - lambda_hat[j])
            .product();
        let alpha_hat_i = num / den;
        for col in 0..(2 * d) {
            let mut log_deriv = 0.0;
            for (j, &l) in lambda.iter().enumerate() {
                let direct = if col == d + j { 1.0 } else { 0.0 };
                log_deriv += (dlh[i][col] - direct) / (lambda_hat[i] - l);
            }
            for j in 0..d {
                if j == i {
                    continue;
                }
                log_deriv -= (dlh[i][col] - dlh[j][col]) / (lambda_hat[i] - lambda_hat[j]);
            }
            jac[(i, col)] = alpha_hat_i * log_deriv;
            jac[(d + i, col)] = dlh[i][col];
        }
    }
    Ok(InversionJacobian {
        matrix: jac,
        method: JacobianMethod::Implicit,
    })
}

/// Default base step for [`jacobian_fd`].
pub const DEFAULT_FD_STEP: f64 = 1e-6;

fn params_with_coordinate(params: &BltParams, coord: usize, value: f64) -> Result<BltParams> {
    let d = params.d();
    let mut alpha = params.alpha().to_vec();
    let mut lambda = params.lambda().to_vec();
    if coord < d {
        alpha[coord] = value;
    } else {
        lambda[coord - d] = value;
    }
    BltParams::new(alpha, lambda)
}

/// Jacobian by central finite differences of [`invert_params`], with
/// per-coordinate step `h * (1 + |theta_j|)`.
pub fn jacobian_fd(params: &BltParams, h: f64) -> Result<InversionJacobian> {
    require_nondegenerate(params)?;
    let d = params.d();
    let theta: Vec<f64> = params
        .alpha()
        .iter()
        .chain(params.lambda())
        .copied()
        .collect();
    let mut jac = Mat::zeros(2 * d, 2 * d);
    for col in 0..(2 * d) {
        let step = h * (1.0 + theta[col].abs());
        let plus = params_with_coordinate(params, col, theta[col] + step)?;
        let minus = params_with_coordinate(params, col, theta[col] - step)?;
        for probe in [&plus, &minus] {
            let report = validate(probe, ValidationMode::Strict);
            if !report.is_valid() || report.regime == Some(RegimeTag::Eq1) {
                return Err(Error::PerturbationInvalid(col));
            }
        }
        if regime_of(&plus) != regime_of(&minus) {
            return Err(Error::PerturbationInvalid(col));
        }
        let inv_plus = invert_params(&plus)?;
        let inv_minus = invert_params(&minus)?;
        for i in 0..d {
            jac[(i, col)] = (inv_plus.alpha_hat()[i] - inv_minus.alpha_hat()[i]) / (2.0 * step);
            jac[(d + i, col)] =
                (inv_plus.lambda_hat()[i] - inv_minus.lambda_hat()[i]) / (2.0 * step);
        }
    }
    Ok(InversionJacobian {
        matrix: jac,
        method: JacobianMethod::FiniteDifference,
    })
}

/// Gradient of the max loss with respect to `(alpha, lambda)`.
///
/// Column order matches [`InversionJacobian`]: first the `d` scale
/// coordinates, then the `d` decay coordinates.
pub fn loss_gradient(params: &BltParams, workload: &WorkloadSpec) -> Result<Vec<f64>> {
    Ok(objective_value_and_gradient(params, workload, Objective::Max)?.1)
}

/// Objective value and its gradient with respect to `(alpha, lambda)`.
///
/// The row-norm part is differentiated through the inverse coefficients
/// `c_hat_t = sum_k alpha_hat_k lambda_hat_k^(t-2)` and chained through the
/// implicit Jacobian of the inversion map. For the max objective the row
/// attaining the maximum at the evaluation point is differentiated (lowest
/// index on ties); for the prefix-sum workload that row is the last one, so
/// the objective is smooth there.
pub fn objective_value_and_gradient(
    params: &BltParams,
    workload: &WorkloadSpec,
    objective: Objective,
) -> Result<(f64, Vec<f64>)> {
    require_nondegenerate(params)?;
    let d = params.d();
    let n = workload.n();

    // Sensitivity part: S = sum_t c_t^2 and dS/dtheta.
    let coeffs = toeplitz_coeffs(params, n);
    let sens_sq: f64 = coeffs.iter().map(|c| c * c).sum();
    let mut dsens_sq = vec![0.0; 2 * d];
    {
        let mut pow = vec![1.0; d];
        let mut pow_prev = vec![0.0; d];
        for (t, &c) in coeffs.iter().enumerate().skip(1) {
            // c_{t+1} = sum_k alpha_k lambda_k^(t-1), with pow = lambda^(t-1).
            for k in 0..d {
                dsens_sq[k] += 2.0 * c * pow[k];
                dsens_sq[d + k] += 2.0 * c * params.alpha()[k] * (t as f64 - 1.0) * pow_prev[k];
            }
            pow_prev.copy_from_slice(&pow);
            for (p, l) in pow.iter_mut().zip(params.lambda()) {
                *p *= l;
            }
        }
    }

    // Row-norm part through the inverse coefficients.
    let inv = invert_params(params)?;
    let jac = jacobian_implicit(params)?;
    let inv_params = inv.to_params();
    let c_hat = toeplitz_coeffs(&inv_params, n);
    let row_sq = loss::b_row_norms_sq(params, workload);

    // adjoint[t] = d(row part)/d(c_hat_{t+1}), with the row part R depending
    // on the objective.
    let (row_part, adjoint) = row_part_and_adjoint(&c_hat, &row_sq, workload, objective, n);

    // Pull the adjoint back to (alpha_hat, lambda_hat).
    let mut grad_hat = vec![0.0; 2 * d];
    {
        let mut pow = vec![1.0; d];
        let mut pow_prev = vec![0.0; d];
        for (t, &a_t) in adjoint.iter().enumerate().skip(1) {
            for k in 0..d {
                grad_hat[k] += a_t * pow[k];
                grad_hat[d + k] += a_t * inv_params.alpha()[k] * (t as f64 - 1.0) * pow_prev[k];
            }
            pow_prev.copy_from_slice(&pow);
            for (p, l) in pow.iter_mut().zip(inv_params.lambda()) {
                *p *= l;
            }
        }
    }

    // Chain through the inversion Jacobian.
    let drow: Vec<f64> = (0..2 * d)
        .map(|col| {
            grad_hat
                .iter()
                .enumerate()
                .map(|(k, g)| g * jac.matrix[(k, col)])
                .sum()
        })
        .collect();

    // Combine the two factors of the objective.
    let (value, grad) = match objective {
        Objective::Max | Objective::Frobenius => {
            let value = (sens_sq * row_part).sqrt();
            let grad = (0..2 * d)
                .map(|col| (row_part * dsens_sq[col] + sens_sq * drow[col]) / (2.0 * value))
                .collect();
            (value, grad)
        }
        Objective::SoftMax(_) => {
            let sens = sens_sq.sqrt();
            let value = sens * row_part;
            let grad = (0..2 * d)
                .map(|col| row_part * dsens_sq[col] / (2.0 * sens) + sens * drow[col])
                .collect();
            (value, grad)
        }
    };
    Ok((value, grad))
}

/// The row-dependent factor of the objective and its adjoint with respect to
/// the inverse coefficients.
///
/// Returns `(R, dR/dc_hat)` where `R` is the squared max row norm, the mean
/// squared row norm, or the log-sum-exp of row norms, depending on the
/// objective.
fn row_part_and_adjoint(
    c_hat: &[f64],
    row_sq: &[f64],
    workload: &WorkloadSpec,
    objective: Objective,
    n: usize,
) -> (f64, Vec<f64>) {
    match workload {
        WorkloadSpec::PrefixSum { .. } => {
            // g_j = running sums of c_hat; R_t = sum_{j <= t} g_j^2.
            let mut g = Vec::with_capacity(n);
            let mut acc = 0.0;
            for &c in c_hat {
                acc += c;
                g.push(acc);
            }
            match objective {
                Objective::Max => {
                    // Ties cannot occur: R_t is strictly increasing unless a
                    // g_j is zero, and then the lowest index convention picks
                    // the same suffix anyway.
                    let (t_star, _) =
                        row_sq
                            .iter()
                            .enumerate()
                            .fold((0, f64::NEG_INFINITY), |best, (t, &v)| {
                                if v > best.1 {
                                    (t, v)
                                } else {
                                    best
                                }
                            });
                    // dR/dc_hat_i = 2 sum_{i <= j <= t*} g_j.
                    let mut adj = vec![0.0; n];
                    let mut suffix = 0.0;
                    for i in (0..=t_star).rev() {
                        suffix += g[i];
                        adj[i] = 2.0 * suffix;
                    }
                    (row_sq[t_star], adj)
                }
                Objective::Frobenius => {
                    // mean of R_t: dR/dc_hat_i = (2/n) sum_{j >= i} (n - j) g_j.
                    let mut adj = vec![0.0; n];
                    let mut suffix = 0.0;
                    for i in (0..n).rev() {
                        suffix += (n - i) as f64 * g[i];
                        adj[i] = 2.0 * suffix / n as f64;
                    }
                    let mean = row_sq.iter().sum::<f64>() / n as f64;
                    (mean, adj)
                }
                Objective::SoftMax(temperature) => {
                    let norms: Vec<f64> = row_sq.iter().map(|r| r.sqrt()).collect();
                    let peak = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let weights: Vec<f64> = norms
                        .iter()
                        .map(|m| ((m - peak) / temperature).exp())
                        .collect();
                    let total: f64 = weights.iter().sum();
                    let lse = peak + temperature * total.ln();
                    // dLSE/dc_hat_i = sum_{j >= i} g_j W_j where
                    // W_j = sum_{t >= j} softmax_t / m_t, since row t depends
                    // on g_j for j <= t and dm_t/dg_j = g_j / m_t.
                    let mut w_suffix = vec![0.0; n + 1];
                    for j in (0..n).rev() {
                        w_suffix[j] = w_suffix[j + 1] + weights[j] / total / norms[j].max(1e-300);
                    }
                    let mut adj = vec![0.0; n];
                    let mut acc = 0.0;
                    for i in (0..n).rev() {
                        acc += g[i] * w_suffix[i];
                        adj[i] = acc;
                    }
                    (lse, adj)
                }
            }
        }
        WorkloadSpec::Explicit(a) => {
            // B rows via convolution with c_hat: B[t, k] = sum_s A[t, s] c_hat_{s - k + 1}.
            let b_row = |t: usize| -> Vec<f64> {
                (0..n)
                    .map(|k| (k..=t).map(|s| a[(t, s)] * c_hat[s - k]).sum::<f64>())
                    .collect()
            };
            let row_adjoint = |t: usize, weight: f64, adj: &mut [f64]| {
                let row = b_row(t);
                for (j, slot) in adj.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (k, rv) in row.iter().enumerate() {
                        if k + j <= t {
                            acc += rv * a[(t, k + j)];
                        }
                    }
                    *slot += 2.0 * weight * acc;
                }
            };
            match objective {
                Objective::Max => {
                    let (t_star, _) =
                        row_sq
                            .iter()
                            .enumerate()
                            .fold((0, f64::NEG_INFINITY), |best, (t, &v)| {
                                if v > best.1 {
                                    (t, v)
                                } else {
                                    best
                                }
                            });
                    let mut adj = vec![0.0; n];
                    row_adjoint(t_star, 1.0, &mut adj);
                    (row_sq[t_star], adj)
                }
                Objective::Frobenius => {
                    let mut adj = vec![0.0; n];
                    for t in 0..n {
                        row_adjoint(t, 1.0 / n as f64, &mut adj);
                    }
                    let mean = row_sq.iter().sum::<f64>() / n as f64;
                    (mean, adj)
                }
                Objective::SoftMax(temperature) => {
                    let norms: Vec<f64> = row_sq.iter().map(|r| r.sqrt()).collect();
                    let peak = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let weights: Vec<f64> = norms
                        .iter()
                        .map(|m| ((m - peak) / temperature).exp())
                        .collect();
                    let total: f64 = weights.iter().sum();
                    let lse = peak + temperature * total.ln();
                    let mut adj = vec![0.0; n];
                    for t in 0..n {
                        let w = weights[t] / total / (2.0 * norms[t].max(1e-300));
                        row_adjoint(t, w, &mut adj);
                    }
                    (lse, adj)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lt1_params() -> BltParams {
        BltParams::new(vec![0.2, 0.1], vec![0.8, 0.4]).unwrap()
    }

    #[test]
    fn d1_jacobian_is_analytic() {
        // d = 1 inversion is (alpha, lambda) -> (-alpha, lambda - alpha).
        let p = BltParams::new(vec![0.5], vec![0.8]).unwrap();
        let want = [[-1.0, 0.0], [-1.0, 1.0]];
        for jac in [
            jacobian_implicit(&p).unwrap(),
            jacobian_fd(&p, DEFAULT_FD_STEP).unwrap(),
        ] {
            for (i, row) in want.iter().enumerate() {
                for (j, w) in row.iter().enumerate() {
                    assert!(
                        (jac.matrix[(i, j)] - w).abs() < 1e-9,
                        "{:?} entry ({i}, {j}) = {}",
                        jac.method,
                        jac.matrix[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn implicit_matches_fd_on_d2() {
        let p = lt1_params();
        let imp = jacobian_implicit(&p).unwrap();
        let fd = jacobian_fd(&p, DEFAULT_FD_STEP).unwrap();
        let dev = imp.relative_deviation(&fd);
        assert!(dev <= 1e-5, "deviation {dev}");
    }

    #[test]
    fn implicit_matches_fd_on_gt1() {
        let p = BltParams::new(vec![0.2, 0.45], vec![0.8, 0.4]).unwrap();
        assert_eq!(regime_of(&p), RegimeTag::Gt1);
        let imp = jacobian_implicit(&p).unwrap();
        let fd = jacobian_fd(&p, DEFAULT_FD_STEP).unwrap();
        assert!(imp.relative_deviation(&fd) <= 1e-5);
    }

    #[test]
    fn fd_converges_at_second_order() {
        let p = lt1_params();
        let imp = jacobian_implicit(&p).unwrap();
        let coarse = jacobian_fd(&p, 2e-4)
            .unwrap()
            .matrix
            .max_abs_diff(&imp.matrix);
        let fine = jacobian_fd(&p, 1e-4)
            .unwrap()
            .matrix
            .max_abs_diff(&imp.matrix);
        // Halving the step should cut the truncation error by about 4.
        assert!(fine < coarse / 2.5, "coarse {coarse}, fine {fine}");
    }

    #[test]
    fn fd_rejects_probes_that_leave_the_valid_region() {
        // The decay sits within one step of the unit interval boundary, so
        // the positive probe would need lambda > 1.
        let p = BltParams::new(vec![0.1], vec![1.0 - 1e-7]).unwrap();
        assert!(matches!(
            jacobian_fd(&p, 1e-6),
            Err(Error::PerturbationInvalid(1))
        ));
    }

    #[test]
    fn degenerate_regime_is_rejected() {
        let p = BltParams::new(vec![0.4, 0.2], vec![0.8, 0.4]).unwrap();
        assert!(matches!(
            jacobian_implicit(&p),
            Err(Error::DegenerateRegime)
        ));
        assert!(matches!(
            jacobian_fd(&p, DEFAULT_FD_STEP),
            Err(Error::DegenerateRegime)
        ));
    }

    #[test]
    fn scale_sum_derivative_identities() {
        // sum(alpha_hat) = -sum(alpha) exactly, so the alpha_hat rows must
        // sum to -1 against alpha columns and 0 against lambda columns.
        let p = BltParams::new(vec![0.15, 0.1, 0.05], vec![0.9, 0.55, 0.25]).unwrap();
        let jac = jacobian_implicit(&p).unwrap();
        let d = p.d();
        for col in 0..d {
            let sum: f64 = (0..d).map(|i| jac.matrix[(i, col)]).sum();
            assert!((sum + 1.0).abs() < 1e-9, "alpha column {col}: {sum}");
        }
        for col in d..(2 * d) {
            let sum: f64 = (0..d).map(|i| jac.matrix[(i, col)]).sum();
            assert!(sum.abs() < 1e-9, "lambda column {col}: {sum}");
        }
    }

    #[test]
    fn jacobian_is_permutation_equivariant() {
        let a = BltParams::new(vec![0.2, 0.1], vec![0.8, 0.4]).unwrap();
        let b = BltParams::new(vec![0.1, 0.2], vec![0.4, 0.8]).unwrap();
        let ja = jacobian_implicit(&a).unwrap();
        let jb = jacobian_implicit(&b).unwrap();
        assert!(ja.matrix.max_abs_diff(&jb.matrix) < 1e-14);
    }

    fn fd_loss_gradient(
        params: &BltParams,
        workload: &WorkloadSpec,
        objective: Objective,
        h: f64,
    ) -> Vec<f64> {
        let d = params.d();
        (0..2 * d)
            .map(|col| {
                let theta = if col < d {
                    params.alpha()[col]
                } else {
                    params.lambda()[col - d]
                };
                let step = h * (1.0 + theta.abs());
                let plus = params_with_coordinate(params, col, theta + step).unwrap();
                let minus = params_with_coordinate(params, col, theta - step).unwrap();
                let f = |p: &BltParams| loss::objective(p, workload, objective).unwrap();
                (f(&plus) - f(&minus)) / (2.0 * step)
            })
            .collect()
    }

    #[test]
    fn loss_gradient_matches_fd_d1() {
        let p = BltParams::new(vec![0.5], vec![0.8]).unwrap();
        let wl = WorkloadSpec::prefix_sum(2);
        let grad = loss_gradient(&p, &wl).unwrap();
        let fd = fd_loss_gradient(&p, &wl, Objective::Max, 1e-6);
        for (g, f) in grad.iter().zip(&fd) {
            assert!(
                (g - f).abs() <= 1e-6 * (1.0 + f.abs()),
                "grad {grad:?} fd {fd:?}"
            );
        }
    }

    #[test]
    fn loss_gradient_matches_fd_for_all_objectives() {
        let p = BltParams::new(vec![0.2, 0.1], vec![0.8, 0.4]).unwrap();
        let wl = WorkloadSpec::prefix_sum(32);
        for objective in [
            Objective::Max,
            Objective::Frobenius,
            Objective::SoftMax(0.1),
        ] {
            let (_, grad) = objective_value_and_gradient(&p, &wl, objective).unwrap();
            let fd = fd_loss_gradient(&p, &wl, objective, 1e-6);
            for (g, f) in grad.iter().zip(&fd) {
                assert!(
                    (g - f).abs() <= 1e-4 * (1.0 + f.abs()),
                    "{objective:?}: grad {grad:?} fd {fd:?}"
                );
            }
        }
    }

    #[test]
    fn loss_gradient_matches_fd_explicit_workload() {
        let p = BltParams::new(vec![0.2, 0.1], vec![0.8, 0.4]).unwrap();
        let n = 12;
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                a[(i, j)] = 1.0 / (1.0 + (i - j) as f64);
            }
        }
        let wl = WorkloadSpec::explicit(a).unwrap();
        for objective in [Objective::Max, Objective::Frobenius] {
            let (_, grad) = objective_value_and_gradient(&p, &wl, objective).unwrap();
            let fd = fd_loss_gradient(&p, &wl, objective, 1e-6);
            for (g, f) in grad.iter().zip(&fd) {
                assert!(
                    (g - f).abs() <= 1e-4 * (1.0 + f.abs()),
                    "{objective:?}: grad {grad:?} fd {fd:?}"
                );
            }
        }
    }

    #[test]
    fn objective_value_agrees_with_loss_report() {
        let p = lt1_params();
        let wl = WorkloadSpec::prefix_sum(64);
        let (value, _) = objective_value_and_gradient(&p, &wl, Objective::Max).unwrap();
        let report = loss::max_loss(&p, &wl).unwrap();
        assert!((value - report.loss).abs() < 1e-12);
        let (value, _) = objective_value_and_gradient(&p, &wl, Objective::Frobenius).unwrap();
        assert!((value - report.frobenius_loss).abs() < 1e-12);
    }
}
