//! Polynomials governing BLT inversion.
//!
//! Three polynomials drive everything: `q(x)` is the product of the decay
//! factors `(1 - lambda_i x)`, `p(x)` is the scale-weighted sum of the
//! one-factor-removed products, and `r(x) = q(x) + x p(x)` is the denominator
//! of the inverse generating function. The reciprocals of the roots of `r`
//! are the decay parameters of the inverse BLT, so this module provides two
//! independent ways of finding them: companion-matrix eigenvalues (the fast
//! path) and bracketed bisection-Newton (the oracle, using the sign-change
//! brackets that the root interlacing guarantees).

use crate::blt::RegimeTag;
use crate::eigen;
use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Relative threshold deciding when a leading coefficient is treated as zero.
pub const EPS_DEG: f64 = 1e-12;
/// Minimal gap below which two decay parameters count as duplicates.
pub const EPS_SEP: f64 = 1e-10;
/// Tolerance on companion-eigenvalue imaginary parts, relative to `1 + |re|`.
pub const TOL_IMAG: f64 = 1e-8;
/// Residual tolerance for returned roots, relative to the coefficient scale.
pub const TOL_ROOT: f64 = 1e-9;

/// Absolute bracket-width tolerance for the bisection-Newton iteration.
const BRACKET_TOL: f64 = 1e-14;
/// Cap on the number of outer-bracket doublings.
const MAX_EXPANSIONS: usize = 200;

/// Real polynomial with coefficients in ascending power order.
///
/// Construction trims trailing coefficients whose magnitude falls below
/// [`EPS_DEG`] relative to the largest coefficient, so `degree` always points
/// at a genuinely nonzero leading term (the zero polynomial is stored as a
/// single zero coefficient).
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming the degree.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "coefficient vector must be non-empty");
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return Self { coeffs: vec![0.0] };
        }
        let last = coeffs
            .iter()
            .rposition(|c| c.abs() > EPS_DEG * scale)
            .unwrap_or(0);
        coeffs.truncate(last + 1);
        Self { coeffs }
    }

    /// Builds a polynomial keeping the full coefficient vector, bypassing the
    /// degree trim. Used when the regime is already known and the leading
    /// coefficient must be retained even if it is small.
    pub(crate) fn new_untrimmed(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "coefficient vector must be non-empty");
        Self { coeffs }
    }

    /// Coefficients in ascending power order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the leading coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// True when every coefficient was trimmed away.
    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Largest absolute coefficient.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Value and first derivative at `x` in one Horner pass.
    pub fn eval_with_deriv(&self, x: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut deriv = 0.0;
        for c in self.coeffs.iter().rev() {
            deriv = deriv * x + value;
            value = value * x + c;
        }
        (value, deriv)
    }

    /// Compensated Horner evaluation: error-free transformations carry the
    /// rounding error of every product and sum through a parallel
    /// compensation pass, giving a value as accurate as if computed in twice
    /// the working precision. Near a root this matters: the plain scheme
    /// returns mostly cancellation noise, which would cap how far Newton
    /// polishing can push the root.
    pub fn eval_compensated(&self, x: f64) -> f64 {
        fn two_sum(a: f64, b: f64) -> (f64, f64) {
            let s = a + b;
            let bb = s - a;
            (s, (a - (s - bb)) + (b - bb))
        }
        fn two_prod(a: f64, b: f64) -> (f64, f64) {
            let p = a * b;
            (p, a.mul_add(b, -p))
        }
        let mut iter = self.coeffs.iter().rev();
        let mut value = *iter.next().expect("coeffs are non-empty");
        let mut comp = 0.0;
        for &c in iter {
            let (p, p_err) = two_prod(value, x);
            let (s, s_err) = two_sum(p, c);
            value = s;
            comp = comp * x + (p_err + s_err);
        }
        value + comp
    }
}

/// Distinct real roots of a polynomial, sorted ascending.
#[derive(Clone, Debug)]
pub struct RootSet {
    roots: Vec<f64>,
    residual: f64,
}

impl RootSet {
    /// Roots sorted ascending.
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Largest `|r(root)|` over the returned roots.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

fn check_distinct(values: &[f64]) -> Result<()> {
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let gap = (values[i] - values[j]).abs();
            if gap <= EPS_SEP {
                return Err(Error::DuplicateDecay { i, j, gap });
            }
        }
    }
    Ok(())
}

/// Expands `prod_i (1 - lambda_i x)`; degree `d`, constant coefficient 1.
pub fn build_q(lambda: &[f64]) -> Result<Polynomial> {
    check_distinct(lambda)?;
    let mut coeffs = vec![1.0];
    for &l in lambda {
        coeffs.push(0.0);
        for k in (1..coeffs.len()).rev() {
            let delta = l * coeffs[k - 1];
            coeffs[k] -= delta;
        }
    }
    Ok(Polynomial::new(coeffs))
}

/// Expands `sum_i alpha_i prod_{j != i} (1 - lambda_j x)`; degree at most `d - 1`.
pub fn build_p(alpha: &[f64], lambda: &[f64]) -> Result<Polynomial> {
    if alpha.len() != lambda.len() {
        return Err(Error::DimensionMismatch {
            expected: lambda.len(),
            got: alpha.len(),
        });
    }
    assert!(!alpha.is_empty(), "degree must be at least 1");
    check_distinct(lambda)?;
    let d = lambda.len();
    let mut coeffs = vec![0.0; d];
    let mut term = Vec::with_capacity(d);
    for (i, &a) in alpha.iter().enumerate() {
        term.clear();
        term.push(a);
        for (j, &l) in lambda.iter().enumerate() {
            if j == i {
                continue;
            }
            term.push(0.0);
            for k in (1..term.len()).rev() {
                let delta = l * term[k - 1];
                term[k] -= delta;
            }
        }
        for (k, &c) in term.iter().enumerate() {
            coeffs[k] += c;
        }
    }
    Ok(Polynomial::new(coeffs))
}

/// Raw ascending coefficients of `r(x) = q(x) + x p(x)`, untrimmed.
pub(crate) fn r_coeffs(p: &Polynomial, q: &Polynomial) -> Vec<f64> {
    let len = q.coeffs().len().max(p.coeffs().len() + 1);
    let mut coeffs = vec![0.0; len];
    for (k, &c) in q.coeffs().iter().enumerate() {
        coeffs[k] += c;
    }
    if !p.is_zero() {
        for (k, &c) in p.coeffs().iter().enumerate() {
            coeffs[k + 1] += c;
        }
    }
    coeffs
}

/// Forms `r(x) = q(x) + x p(x)`, trimming a cancelled leading coefficient.
pub fn build_r(p: &Polynomial, q: &Polynomial) -> Polynomial {
    Polynomial::new(r_coeffs(p, q))
}

/// Companion matrix whose characteristic polynomial is `poly / leading`.
///
/// Layout: ones on the subdiagonal, last column `-c_k / c_D`.
pub fn companion_matrix(poly: &Polynomial) -> Result<Mat> {
    if poly.is_zero() || poly.degree() < 1 {
        return Err(Error::ZeroPolynomial);
    }
    let d = poly.degree();
    let lead = poly.coeffs()[d];
    let mut m = Mat::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = 1.0;
    }
    for k in 0..d {
        m[(k, d - 1)] = -poly.coeffs()[k] / lead;
    }
    Ok(m)
}

/// Guarded Newton polish with compensated residuals: accept a step only
/// while it shrinks |r|, which drives simple roots to the representation
/// limit instead of the plain-evaluation noise floor.
fn polish_root(poly: &Polynomial, mut x: f64) -> f64 {
    for _ in 0..5 {
        let value = poly.eval_compensated(x);
        let (_, deriv) = poly.eval_with_deriv(x);
        if value == 0.0 || deriv == 0.0 {
            break;
        }
        let step = value / deriv;
        let candidate = x - step;
        if poly.eval_compensated(candidate).abs() < value.abs() {
            x = candidate;
        } else {
            break;
        }
        if step.abs() <= 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

fn finish_roots(poly: &Polynomial, mut roots: Vec<f64>) -> Result<RootSet> {
    roots.sort_by(f64::total_cmp);
    for r in roots.iter_mut() {
        *r = polish_root(poly, *r);
    }
    for i in 1..roots.len() {
        let gap = (roots[i] - roots[i - 1]).abs();
        if gap <= EPS_SEP {
            return Err(Error::CloseRoots {
                i: i - 1,
                j: i,
                gap,
            });
        }
    }
    let residual = roots
        .iter()
        .map(|&r| poly.eval_compensated(r).abs())
        .fold(0.0, f64::max);
    Ok(RootSet { roots, residual })
}

/// All real roots via companion-matrix eigenvalues.
///
/// Fails with [`Error::ComplexRoots`] when an eigenvalue has an imaginary
/// part beyond [`TOL_IMAG`], which signals that the input polynomial did not
/// come from parameters with guaranteed-real root structure.
pub fn roots_companion(poly: &Polynomial) -> Result<RootSet> {
    let m = companion_matrix(poly)?;
    let vals = eigen::eigenvalues(&m)?;
    let mut roots = Vec::with_capacity(vals.len());
    for (re, im) in vals {
        if im.abs() > TOL_IMAG * (1.0 + re.abs()) {
            return Err(Error::ComplexRoots { re, im });
        }
        roots.push(re);
    }
    finish_roots(poly, roots)
}

/// Bisection-Newton hybrid on a bracket with a sign change.
fn bracketed_root(poly: &Polynomial, a: f64, b: f64) -> Result<f64> {
    let fa = poly.eval(a);
    let fb = poly.eval(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure(0));
    }
    // Orient so that poly(lo) < 0 < poly(hi).
    let (mut lo, mut hi) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut x = 0.5 * (a + b);
    let mut step_old = (b - a).abs();
    let mut step = step_old;
    let (mut value, mut deriv) = poly.eval_with_deriv(x);
    for _ in 0..200 {
        let newton_leaves_bracket = ((x - hi) * deriv - value) * ((x - lo) * deriv - value) > 0.0;
        let newton_too_slow = (2.0 * value).abs() > (step_old * deriv).abs();
        if newton_leaves_bracket || newton_too_slow {
            step_old = step;
            step = 0.5 * (hi - lo);
            x = lo + step;
            if x == lo {
                return Ok(x);
            }
        } else {
            step_old = step;
            step = value / deriv;
            let prev = x;
            x -= step;
            if x == prev {
                return Ok(x);
            }
        }
        if step.abs() < BRACKET_TOL {
            return Ok(x);
        }
        let (v, dv) = poly.eval_with_deriv(x);
        value = v;
        deriv = dv;
        if value < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    Ok(x)
}

/// All real roots via the sign-change brackets `(mu_i, mu_{i+1})`.
///
/// The values of `r` at consecutive `mu_i = 1 / lambda_i` alternate in sign,
/// which pins one root inside each of the `d - 1` interior intervals. The
/// final root lives beyond `mu_d` (regime [`RegimeTag::Lt1`]) or below `-1`
/// (regime [`RegimeTag::Gt1`]); its outer bracket endpoint is doubled until a
/// sign change appears. In regime [`RegimeTag::Eq1`] the polynomial has
/// degree `d - 1` and the interior brackets already account for every root.
///
/// This path is deliberately independent of the eigensolver so the two can
/// cross-check each other.
pub fn roots_bracketed(r: &Polynomial, mu: &[f64], regime: RegimeTag) -> Result<RootSet> {
    assert!(!mu.is_empty(), "at least one pole is required");
    for w in mu.windows(2) {
        assert!(w[0] < w[1], "mu must be sorted ascending and distinct");
    }
    let d = mu.len();
    let mut roots = Vec::with_capacity(d);
    for i in 0..(d - 1) {
        roots.push(bracketed_root(r, mu[i], mu[i + 1])?);
    }
    match regime {
        RegimeTag::Eq1 => {}
        RegimeTag::Lt1 => {
            let lo = mu[d - 1];
            let f_lo = r.eval(lo);
            let mut hi = 2.0 * lo.max(1.0);
            let mut expansions = 0;
            while r.eval(hi).signum() == f_lo.signum() {
                hi *= 2.0;
                expansions += 1;
                if expansions >= MAX_EXPANSIONS {
                    return Err(Error::BracketFailure(expansions));
                }
            }
            roots.push(bracketed_root(r, lo, hi)?);
        }
        RegimeTag::Gt1 => {
            let hi = -1.0;
            let f_hi = r.eval(hi);
            let mut lo = -2.0;
            let mut expansions = 0;
            while r.eval(lo).signum() == f_hi.signum() {
                lo *= 2.0;
                expansions += 1;
                if expansions >= MAX_EXPANSIONS {
                    return Err(Error::BracketFailure(expansions));
                }
            }
            roots.push(bracketed_root(r, lo, hi)?);
        }
    }
    finish_roots(r, roots)
}
