//! BLT parameters, coefficients, and the inversion algorithm.
//!
//! A degree-`d` BLT matrix is the lower-triangular Toeplitz matrix with unit
//! diagonal whose subdiagonal coefficients are a sum of `d` geometric
//! sequences: `c_1 = 1` and `c_k = sum_i alpha_i lambda_i^(k-2)` for `k >= 2`.
//! The family is closed under inversion, and when the scales are positive
//! with `sum alpha_i < 1` and the decays are distinct in `(0, 1)`, the
//! inverse parameters have a rigid structure: every inverse scale is
//! negative, and the inverse decays land in `(0, 1)` except for at most one,
//! whose placement is decided by `sum_i alpha_i / lambda_i` relative to 1
//! (see [`RegimeTag`]).
//!
//! [`invert_params`] computes the inverse parameters in `O(d^3)`: expand the
//! polynomials, take companion-matrix eigenvalues of `r(x)` for the inverse
//! decays, and evaluate a closed product formula for the inverse scales.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::poly::{self, EPS_DEG, EPS_SEP};

/// Default cap on dense materialization side length.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Classification of `sum_i alpha_i / lambda_i` against 1.
///
/// The tag decides where the inverse decay parameters land: all in `(0, 1)`
/// for [`RegimeTag::Lt1`], one exactly zero for [`RegimeTag::Eq1`], one in
/// `(-1, 0)` for [`RegimeTag::Gt1`]. Equality is detected up to a relative
/// band of width [`EPS_DEG`], since floating-point inputs never hit the
/// measure-zero boundary exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    /// `sum alpha_i / lambda_i < 1`.
    #[serde(rename = "LT1")]
    Lt1,
    /// `sum alpha_i / lambda_i = 1` (within the tolerance band).
    #[serde(rename = "EQ1")]
    Eq1,
    /// `sum alpha_i / lambda_i > 1`.
    #[serde(rename = "GT1")]
    Gt1,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegimeTag::Lt1 => "LT1",
            RegimeTag::Eq1 => "EQ1",
            RegimeTag::Gt1 => "GT1",
        })
    }
}

/// Scale and decay parameters of a BLT matrix.
///
/// Pairs are kept in canonical order: `lambda` descending, with each
/// `alpha[i]` attached to its `lambda[i]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct BltParams {
    alpha: Vec<f64>,
    lambda: Vec<f64>,
}

#[derive(Deserialize)]
struct RawParams {
    alpha: Vec<f64>,
    lambda: Vec<f64>,
}

impl TryFrom<RawParams> for BltParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        BltParams::new(raw.alpha, raw.lambda)
    }
}

impl BltParams {
    /// Builds parameters, sorting pairs into canonical descending-decay order.
    pub fn new(alpha: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        if alpha.len() != lambda.len() {
            return Err(Error::DimensionMismatch {
                expected: lambda.len(),
                got: alpha.len(),
            });
        }
        if alpha.is_empty() {
            return Err(Error::InvalidParams("degree must be at least 1".into()));
        }
        if let Some(bad) = alpha.iter().chain(&lambda).find(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite parameter {bad}")));
        }
        let mut pairs: Vec<(f64, f64)> = lambda.into_iter().zip(alpha).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (lambda, alpha) = pairs.into_iter().unzip();
        Ok(Self { alpha, lambda })
    }

    /// Degree `d`.
    pub fn d(&self) -> usize {
        self.alpha.len()
    }

    /// Scale parameters, ordered to match [`BltParams::lambda`].
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Decay parameters in descending order.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `sum_i alpha_i / lambda_i`, the regime-deciding quantity.
    pub fn decay_weighted_scale_sum(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.lambda)
            .map(|(a, l)| a / l)
            .sum()
    }

    /// Shorthand for [`invert_params`].
    pub fn invert(&self) -> Result<InverseBltParams> {
        invert_params(self)
    }
}

/// Parameters of the inverse BLT, together with the regime they came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawInverse")]
pub struct InverseBltParams {
    alpha_hat: Vec<f64>,
    lambda_hat: Vec<f64>,
    regime: RegimeTag,
}

#[derive(Deserialize)]
struct RawInverse {
    alpha_hat: Vec<f64>,
    lambda_hat: Vec<f64>,
    regime: RegimeTag,
}

impl TryFrom<RawInverse> for InverseBltParams {
    type Error = Error;

    fn try_from(raw: RawInverse) -> Result<Self> {
        if raw.alpha_hat.len() != raw.lambda_hat.len() {
            return Err(Error::DimensionMismatch {
                expected: raw.lambda_hat.len(),
                got: raw.alpha_hat.len(),
            });
        }
        let mut pairs: Vec<(f64, f64)> = raw.lambda_hat.into_iter().zip(raw.alpha_hat).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (lambda_hat, alpha_hat) = pairs.into_iter().unzip();
        Ok(Self {
            alpha_hat,
            lambda_hat,
            regime: raw.regime,
        })
    }
}

impl InverseBltParams {
    /// Inverse scale parameters (all negative for strictly valid inputs).
    pub fn alpha_hat(&self) -> &[f64] {
        &self.alpha_hat
    }

    /// Inverse decay parameters in descending order.
    pub fn lambda_hat(&self) -> &[f64] {
        &self.lambda_hat
    }

    /// Regime of the original parameters.
    pub fn regime(&self) -> RegimeTag {
        self.regime
    }

    /// Degree `d`.
    pub fn d(&self) -> usize {
        self.alpha_hat.len()
    }

    /// Reinterprets the inverse as plain BLT parameters (for streaming,
    /// coefficient, and materialization routines).
    pub fn to_params(&self) -> BltParams {
        BltParams::new(self.alpha_hat.clone(), self.lambda_hat.clone())
            .expect("inverse parameters are finite and matched")
    }
}

/// Which set of constraints [`validate`] checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    /// Full invertibility-theorem preconditions.
    Strict,
    /// Finiteness and decay distinctness only; any such BLT is invertible,
    /// but the inverse-parameter structure is then not guaranteed.
    Lenient,
}

/// One violated constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// `alpha[i]` is not strictly positive.
    AlphaNotPositive { index: usize, value: f64 },
    /// `sum alpha_i` is not below 1.
    AlphaSumTooLarge { sum: f64 },
    /// `lambda[i]` is outside the open unit interval.
    LambdaOutOfRange { index: usize, value: f64 },
    /// Two decay parameters are closer than the separation threshold.
    LambdaTooClose { i: usize, j: usize, gap: f64 },
    /// A parameter is NaN or infinite.
    NonFinite { index: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::AlphaNotPositive { index, value } => {
                write!(f, "alpha[{index}] = {value} must be > 0")
            }
            Violation::AlphaSumTooLarge { sum } => {
                write!(f, "sum(alpha) = {sum} must be < 1")
            }
            Violation::LambdaOutOfRange { index, value } => {
                write!(f, "lambda[{index}] = {value} must lie in (0, 1)")
            }
            Violation::LambdaTooClose { i, j, gap } => {
                write!(
                    f,
                    "lambda[{i}] and lambda[{j}] are separated by only {gap:e}"
                )
            }
            Violation::NonFinite { index } => {
                write!(f, "parameter {index} is not finite")
            }
        }
    }
}

/// Outcome of [`validate`]: the violations found, and the regime when none.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// Constraints that failed, empty when the parameters pass.
    pub violations: Vec<Violation>,
    /// Regime classification; present when strict validation passes.
    pub regime: Option<RegimeTag>,
}

impl ValidationReport {
    /// True when no constraint was violated.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Human-readable summary of all violations.
    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(Violation::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Checks parameter constraints without panicking.
pub fn validate(params: &BltParams, mode: ValidationMode) -> ValidationReport {
    let mut violations = Vec::new();
    for (i, v) in params.alpha.iter().chain(&params.lambda).enumerate() {
        if !v.is_finite() {
            violations.push(Violation::NonFinite { index: i });
        }
    }
    for i in 0..params.d() {
        for j in (i + 1)..params.d() {
            let gap = (params.lambda[i] - params.lambda[j]).abs();
            if gap <= EPS_SEP {
                violations.push(Violation::LambdaTooClose { i, j, gap });
            }
        }
    }
    if mode == ValidationMode::Strict {
        for (i, &a) in params.alpha.iter().enumerate() {
            if a <= 0.0 {
                violations.push(Violation::AlphaNotPositive { index: i, value: a });
            }
        }
        let sum: f64 = params.alpha.iter().sum();
        if sum >= 1.0 {
            violations.push(Violation::AlphaSumTooLarge { sum });
        }
        for (i, &l) in params.lambda.iter().enumerate() {
            if l <= 0.0 || l >= 1.0 {
                violations.push(Violation::LambdaOutOfRange { index: i, value: l });
            }
        }
    }
    let regime = if violations.is_empty() && mode == ValidationMode::Strict {
        Some(classify_regime(params))
    } else {
        None
    };
    ValidationReport { violations, regime }
}

fn classify_regime(params: &BltParams) -> RegimeTag {
    let sum = params.decay_weighted_scale_sum();
    if (sum - 1.0).abs() <= EPS_DEG * sum.abs().max(1.0) {
        RegimeTag::Eq1
    } else if sum < 1.0 {
        RegimeTag::Lt1
    } else {
        RegimeTag::Gt1
    }
}

/// Regime of strictly valid parameters.
pub fn regime_of(params: &BltParams) -> RegimeTag {
    classify_regime(params)
}

/// First `n` Toeplitz coefficients `c_1 .. c_n` in `O(n d)`.
pub fn toeplitz_coeffs(params: &BltParams, n: usize) -> Vec<f64> {
    assert!(n >= 1, "n must be at least 1");
    let mut coeffs = Vec::with_capacity(n);
    coeffs.push(1.0);
    let mut pow = vec![1.0; params.d()];
    for _ in 2..=n {
        let c: f64 = params.alpha.iter().zip(&pow).map(|(a, p)| a * p).sum();
        coeffs.push(c);
        for (p, l) in pow.iter_mut().zip(&params.lambda) {
            *p *= l;
        }
    }
    coeffs
}

/// Dense `n x n` BLT matrix, capped at [`DEFAULT_DENSE_CAP`].
pub fn materialize(params: &BltParams, n: usize) -> Result<Mat> {
    materialize_with_cap(params, n, DEFAULT_DENSE_CAP)
}

/// Dense materialization with an explicit size cap.
pub fn materialize_with_cap(params: &BltParams, n: usize, cap: usize) -> Result<Mat> {
    assert!(n >= 1, "n must be at least 1");
    if n > cap {
        return Err(Error::SizeLimit { n, cap });
    }
    let coeffs = toeplitz_coeffs(params, n);
    let mut m = Mat::zeros(n, n);
    for j in 0..n {
        for k in 0..=j {
            m[(j, k)] = coeffs[j - k];
        }
    }
    Ok(m)
}

/// Scale parameters from a pair of decay vectors, by the closed product form
///
/// ```text
/// alpha_i     = prod_j (lambda_i - lambda_hat_j) / prod_{j != i} (lambda_i - lambda_j)
/// alpha_hat_i = prod_j (lambda_hat_i - lambda_j) / prod_{j != i} (lambda_hat_i - lambda_hat_j)
/// ```
///
/// All pairwise separations must exceed [`EPS_SEP`]. At most one entry of
/// `lambda_hat` may be zero: the formula extends continuously to that point,
/// which is exactly the degenerate regime produced by [`RegimeTag::Eq1`].
pub fn scales_from_decays(lambda: &[f64], lambda_hat: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if lambda.len() != lambda_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: lambda.len(),
            got: lambda_hat.len(),
        });
    }
    let d = lambda.len();
    let check_pairwise = |v: &[f64], name: &str| -> Result<()> {
        for i in 0..d {
            for j in (i + 1)..d {
                let gap = (v[i] - v[j]).abs();
                if gap <= EPS_SEP {
                    return Err(Error::DegenerateDecays(format!(
                        "{name}[{i}] and {name}[{j}] are separated by only {gap:e}"
                    )));
                }
            }
        }
        Ok(())
    };
    check_pairwise(lambda, "lambda")?;
    check_pairwise(lambda_hat, "lambda_hat")?;
    for (i, &l) in lambda.iter().enumerate() {
        for (j, &lh) in lambda_hat.iter().enumerate() {
            let gap = (l - lh).abs();
            if gap <= EPS_SEP {
                return Err(Error::DegenerateDecays(format!(
                    "lambda[{i}] and lambda_hat[{j}] are separated by only {gap:e}"
                )));
            }
        }
    }
    let zeros = lambda_hat.iter().filter(|v| **v == 0.0).count();
    if zeros > 1 {
        return Err(Error::DegenerateDecays(format!(
            "{zeros} zero entries in lambda_hat; at most one is allowed"
        )));
    }

    let product_form = |own: &[f64], other: &[f64]| -> Vec<f64> {
        own.iter()
            .enumerate()
            .map(|(i, &x)| {
                let num: f64 = other.iter().map(|&y| x - y).product();
                let den: f64 = own
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &y)| x - y)
                    .product();
                num / den
            })
            .collect()
    };
    Ok((
        product_form(lambda, lambda_hat),
        product_form(lambda_hat, lambda),
    ))
}

/// Inverse BLT parameters.
///
/// Requires strictly valid input (see [`ValidationMode::Strict`]); the
/// degenerate `sum alpha_i / lambda_i = 1` case is supported by dropping the
/// cancelled leading coefficient of `r` and appending a zero inverse decay.
pub fn invert_params(params: &BltParams) -> Result<InverseBltParams> {
    let report = validate(params, ValidationMode::Strict);
    if !report.is_valid() {
        return Err(Error::InvalidParams(report.summary()));
    }
    invert_with_regime(
        params,
        report.regime.expect("strict validation reports a regime"),
    )
}

/// Inversion without the strict-validity gate.
///
/// Every BLT matrix is invertible, but outside the strictly valid class the
/// inverse need not have real distinct decay parameters; when it does not,
/// this fails with the underlying root-finding error. The main use is
/// inverting an inverse: the parameters of `C^-1` have negative scales, yet
/// their inversion is exact and recovers `C`.
pub fn invert_params_lenient(params: &BltParams) -> Result<InverseBltParams> {
    let report = validate(params, ValidationMode::Lenient);
    if !report.is_valid() {
        return Err(Error::InvalidParams(report.summary()));
    }
    invert_with_regime(params, classify_regime(params))
}

/// The three inversion polynomials `(p, q, r)` for the given regime.
///
/// The regime, not a generic coefficient threshold, decides the degree of
/// `r = q + x p`: the leading coefficient vanishes exactly when the regime
/// is [`RegimeTag::Eq1`], and near that boundary a threshold test and the
/// regime test could disagree.
pub fn inversion_polynomials(
    params: &BltParams,
    regime: RegimeTag,
) -> Result<(poly::Polynomial, poly::Polynomial, poly::Polynomial)> {
    let q = poly::build_q(&params.lambda)?;
    let p = poly::build_p(&params.alpha, &params.lambda)?;
    let raw = poly::r_coeffs(&p, &q);
    let r = match regime {
        RegimeTag::Eq1 => poly::Polynomial::new(raw[..params.d()].to_vec()),
        _ => poly::Polynomial::new_untrimmed(raw),
    };
    Ok((p, q, r))
}

fn invert_with_regime(params: &BltParams, regime: RegimeTag) -> Result<InverseBltParams> {
    let (_, _, r) = inversion_polynomials(params, regime)?;

    // Degree-1 degenerate case: r is the constant 1 and has no roots; the
    // single inverse decay is the appended zero.
    let mut lambda_hat: Vec<f64> = if r.degree() == 0 {
        Vec::new()
    } else {
        let roots = poly::roots_companion(&r).map_err(|e| Error::InversionFailure(Box::new(e)))?;
        roots.roots().iter().map(|nu| 1.0 / nu).collect()
    };
    if regime == RegimeTag::Eq1 {
        lambda_hat.push(0.0);
    }
    let (_, mut alpha_hat) = scales_from_decays(&params.lambda, &lambda_hat)?;

    let mut pairs: Vec<(f64, f64)> = lambda_hat.into_iter().zip(alpha_hat.drain(..)).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (lambda_hat, alpha_hat) = pairs.into_iter().unzip();
    Ok(InverseBltParams {
        alpha_hat,
        lambda_hat,
        regime,
    })
}

/// Builds the unique (BLT, inverse) pair from interlaced decay vectors.
///
/// The inputs must satisfy the strict interlacing chain
/// `1 > lambda_1 > lambda_hat_1 > lambda_2 > ... > lambda_d > lambda_hat_d > 0`
/// with every gap above [`EPS_SEP`]; the resulting BLT is strictly valid with
/// regime [`RegimeTag::Lt1`].
pub fn from_interlaced(
    lambda: &[f64],
    lambda_hat: &[f64],
) -> Result<(BltParams, InverseBltParams)> {
    if lambda.len() != lambda_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: lambda.len(),
            got: lambda_hat.len(),
        });
    }
    let d = lambda.len();
    // The full chain, position by position: 1, l1, lh1, l2, lh2, ..., ld, lhd, 0.
    let mut chain = Vec::with_capacity(2 * d + 2);
    chain.push((1.0, "1".to_string()));
    for i in 0..d {
        chain.push((lambda[i], format!("lambda[{i}]")));
        chain.push((lambda_hat[i], format!("lambda_hat[{i}]")));
    }
    chain.push((0.0, "0".to_string()));
    for (pos, w) in chain.windows(2).enumerate() {
        if w[0].0 - w[1].0 <= EPS_SEP {
            return Err(Error::InterlacingViolation {
                position: pos,
                detail: format!(
                    "{} = {} must exceed {} = {}",
                    w[0].1, w[0].0, w[1].1, w[1].0
                ),
            });
        }
    }
    let (alpha, alpha_hat) = scales_from_decays(lambda, lambda_hat)?;
    let params = BltParams::new(alpha, lambda.to_vec())?;
    let inverse = InverseBltParams {
        alpha_hat,
        lambda_hat: lambda_hat.to_vec(),
        regime: RegimeTag::Lt1,
    };
    Ok((params, inverse))
}

/// Legacy `(u, W, v, kappa)` representation of the inverse first column:
/// `c_hat_1 = u . v + kappa` and `c_hat_t = u^T W^(t-1) v` for `t >= 2`.
#[derive(Clone, Debug)]
pub struct LegacyUwv {
    /// Diagonal of `W`, equal to the inverse decay parameters.
    pub w_diag: Vec<f64>,
    /// All-ones readout vector.
    pub u: Vec<f64>,
    /// Per-channel input weights `alpha_hat_i / lambda_hat_i`.
    pub v: Vec<f64>,
    /// Constant correction making the leading coefficient exactly 1.
    pub kappa: f64,
}

impl LegacyUwv {
    /// Reconstructs `c_hat_1 .. c_hat_n` from the representation.
    pub fn reconstruct_coeffs(&self, n: usize) -> Vec<f64> {
        let d = self.w_diag.len();
        let mut coeffs = Vec::with_capacity(n);
        let dot: f64 = self.u.iter().zip(&self.v).map(|(a, b)| a * b).sum();
        coeffs.push(dot + self.kappa);
        let mut pow = self.w_diag.clone();
        for _ in 2..=n {
            let c: f64 = (0..d).map(|i| self.u[i] * pow[i] * self.v[i]).sum();
            coeffs.push(c);
            for (p, w) in pow.iter_mut().zip(&self.w_diag) {
                *p *= w;
            }
        }
        coeffs
    }
}

/// Converts inverse parameters to the legacy `(u, W, v, kappa)` form.
///
/// `kappa = 1 - sum_i alpha_hat_i / lambda_hat_i`, the unique constant that
/// makes the leading coefficient `c_hat_1 = u . v + kappa` come out as
/// exactly 1; the original parameters are accepted for signature parity with
/// the decay-pair representation but are not needed once `kappa` is pinned
/// this way. Fails with [`Error::ZeroDecay`] in the degenerate regime, where
/// a zero decay makes `v` undefined.
pub fn legacy_uwv(inv: &InverseBltParams, _params: &BltParams) -> Result<LegacyUwv> {
    if let Some(index) = inv.lambda_hat.iter().position(|&l| l == 0.0) {
        return Err(Error::ZeroDecay { index });
    }
    let v: Vec<f64> = inv
        .alpha_hat
        .iter()
        .zip(&inv.lambda_hat)
        .map(|(a, l)| a / l)
        .collect();
    let kappa = 1.0 - v.iter().sum::<f64>();
    Ok(LegacyUwv {
        w_diag: inv.lambda_hat.clone(),
        u: vec![1.0; inv.d()],
        v,
        kappa,
    })
}
