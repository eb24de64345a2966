//! Ordinary generating functions of BLT columns.
//!
//! The first column of a lower-triangular Toeplitz matrix and the formal
//! power series `sum_t c_{t+1} x^t` carry the same data, and matrix products
//! correspond to series products. That equivalence is the master correctness
//! oracle of this crate: checking `C * C_inv = I` for every `n` at once
//! reduces to checking that a truncated Cauchy convolution of the two
//! coefficient sequences is the identity sequence.
//!
//! For a BLT the generating function is rational: `f(x) = r(x) / q(x)` with
//! the polynomials from [`crate::poly`], and the inverse matrix has the
//! reciprocal `q(x) / r(x)`.

use crate::blt::{self, BltParams, ValidationMode};
use crate::error::{Error, Result};
use crate::poly::{self, Polynomial};

/// Ratio of two polynomials with `den(0) = 1`.
#[derive(Clone, Debug)]
pub struct RationalGF {
    num: Polynomial,
    den: Polynomial,
}

impl RationalGF {
    /// Builds a rational function, normalizing so the denominator has unit
    /// constant coefficient.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        let den0 = den.coeffs()[0];
        if den0 == 0.0 {
            return Err(Error::NonUnitConstant);
        }
        let normalize =
            |p: &Polynomial| Polynomial::new(p.coeffs().iter().map(|c| c / den0).collect());
        Ok(Self {
            num: normalize(&num),
            den: normalize(&den),
        })
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    /// Pointwise value `num(x) / den(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.num.eval(x) / self.den.eval(x)
    }
}

/// Generating function `r(x) / q(x)` of a BLT.
///
/// For strictly valid parameters the numerator and denominator are co-prime;
/// this is checked numerically at the denominator roots `1 / lambda_i`.
/// Lenient parameters (for example all-zero scales, where `f` collapses to
/// `q(x) / q(x)`) skip the check.
pub fn genfun_of(params: &BltParams) -> Result<RationalGF> {
    let q = poly::build_q(params.lambda())?;
    let p = poly::build_p(params.alpha(), params.lambda())?;
    let r = poly::build_r(&p, &q);
    if blt::validate(params, ValidationMode::Strict).is_valid() {
        let scale = r.coeff_scale();
        for &l in params.lambda() {
            let at_pole = r.eval(1.0 / l);
            if at_pole.abs() <= 1e-8 * scale {
                return Err(Error::DegenerateDecays(format!(
                    "numerator nearly vanishes at denominator root 1/{l}"
                )));
            }
        }
    }
    RationalGF::new(r, q)
}

/// Swaps numerator and denominator: the generating function of the inverse.
pub fn reciprocal(gf: &RationalGF) -> Result<RationalGF> {
    RationalGF::new(gf.den.clone(), gf.num.clone())
}

/// First `n` Maclaurin coefficients of `num / den` by linear recurrence,
/// `O(n deg(den))`.
pub fn maclaurin(gf: &RationalGF, n: usize) -> Vec<f64> {
    assert!(n >= 1, "n must be at least 1");
    let num = gf.num.coeffs();
    let den = gf.den.coeffs();
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let mut c = num.get(t).copied().unwrap_or(0.0);
        for k in 1..den.len().min(t + 1) {
            c -= den[k] * out[t - k];
        }
        out.push(c);
    }
    out
}

/// Truncated Cauchy convolution of two coefficient sequences.
pub fn convolve_truncated(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (t, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in 0..=t.min(a.len() - 1) {
            if t - k < b.len() {
                acc += a[k] * b[t - k];
            }
        }
        *slot = acc;
    }
    out
}

/// Largest deviation `max_t |(a * b)_t - expected_t|` of the truncated series
/// product from an expected sequence.
///
/// Because series products and Toeplitz products agree, this equals the
/// largest absolute entry of `M_b M_c - M_a` over the full `n x n` matrices.
pub fn series_product_check(a: &[f64], b: &[f64], expected: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() != expected.len() {
        return Err(Error::LengthMismatch {
            a: a.len(),
            b: b.len().min(expected.len()),
        });
    }
    let conv = convolve_truncated(a, b, a.len());
    Ok(conv
        .iter()
        .zip(expected)
        .map(|(c, e)| (c - e).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blt::{invert_params, toeplitz_coeffs};

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len(), "got {got:?}, want {want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn genfun_of_lt1_example() {
        let p = BltParams::new(vec![0.2, 0.1], vec![0.8, 0.4]).unwrap();
        let gf = genfun_of(&p).unwrap();
        assert_close(gf.num().coeffs(), &[1.0, -0.9, 0.16], 1e-14);
        assert_close(gf.den().coeffs(), &[1.0, -1.2, 0.32], 1e-14);
    }

    #[test]
    fn genfun_of_identity_blt() {
        let p = BltParams::new(vec![0.0], vec![0.5]).unwrap();
        let gf = genfun_of(&p).unwrap();
        assert_eq!(gf.num(), gf.den());
        assert_close(&maclaurin(&gf, 5), &[1.0, 0.0, 0.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn genfun_of_degenerate_example() {
        let p = BltParams::new(vec![0.4, 0.2], vec![0.8, 0.4]).unwrap();
        let gf = genfun_of(&p).unwrap();
        assert_close(gf.num().coeffs(), &[1.0, -0.6], 1e-14);
        assert_close(gf.den().coeffs(), &[1.0, -1.2, 0.32], 1e-14);
    }

    #[test]
    fn reciprocal_swaps_and_round_trips() {
        let p = BltParams::new(vec![0.4, 0.2], vec![0.8, 0.4]).unwrap();
        let gf = genfun_of(&p).unwrap();
        let inv = reciprocal(&gf).unwrap();
        assert_close(inv.num().coeffs(), &[1.0, -1.2, 0.32], 1e-14);
        assert_close(inv.den().coeffs(), &[1.0, -0.6], 1e-14);
        let back = reciprocal(&inv).unwrap();
        assert_close(back.num().coeffs(), gf.num().coeffs(), 1e-14);
        assert_close(back.den().coeffs(), gf.den().coeffs(), 1e-14);
    }

    #[test]
    fn reciprocal_requires_nonzero_constant() {
        let gf = RationalGF::new(
            Polynomial::new(vec![0.0, 1.0]),
            Polynomial::new(vec![1.0, -0.5]),
        )
        .unwrap();
        assert!(matches!(reciprocal(&gf), Err(Error::NonUnitConstant)));
    }

    #[test]
    fn maclaurin_matches_toeplitz_coeffs() {
        let p = BltParams::new(vec![0.4, 0.2], vec![0.8, 0.4]).unwrap();
        let gf = genfun_of(&p).unwrap();
        assert_close(&maclaurin(&gf, 4), &[1.0, 0.6, 0.4, 0.288], 1e-14);

        let inv = reciprocal(&gf).unwrap();
        assert_close(&maclaurin(&inv, 4), &[1.0, -0.6, -0.04, -0.024], 1e-14);
    }

    #[test]
    fn maclaurin_of_one_is_identity_sequence() {
        let gf = RationalGF::new(Polynomial::new(vec![1.0]), Polynomial::new(vec![1.0])).unwrap();
        assert_close(&maclaurin(&gf, 4), &[1.0, 0.0, 0.0, 0.0], 0.0);
    }

    #[test]
    fn series_product_worked_example() {
        let c = vec![1.0, 0.6, 0.4, 0.288];
        let c_hat = vec![1.0, -0.6, -0.04, -0.024];
        let identity = vec![1.0, 0.0, 0.0, 0.0];
        let dev = series_product_check(&c, &c_hat, &identity).unwrap();
        assert!(dev <= 1e-12, "deviation {dev}");
    }

    #[test]
    fn series_product_identity_series() {
        let a = vec![0.3, -0.7, 1.1, 0.0];
        let mut e1 = vec![0.0; 4];
        e1[0] = 1.0;
        let dev = series_product_check(&a, &e1, &a).unwrap();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn series_product_rejects_length_mismatch() {
        assert!(matches!(
            series_product_check(&[1.0], &[1.0, 0.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn convolution_matches_dense_toeplitz_product() {
        // Multiply two random lower-triangular Toeplitz matrices densely and
        // compare the first column with the convolution.
        let n = 32;
        let mut rng = crate::rng::CounterRng::new(11);
        let a: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let dense = |c: &[f64]| {
            let mut m = crate::matrix::Mat::zeros(n, n);
            for j in 0..n {
                for k in 0..=j {
                    m[(j, k)] = c[j - k];
                }
            }
            m
        };
        let prod = dense(&a).matmul(&dense(&b));
        let conv = convolve_truncated(&a, &b, n);
        for t in 0..n {
            assert!((prod[(t, 0)] - conv[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn f_times_f_hat_is_one() {
        let p = BltParams::new(vec![0.3, 0.15, 0.05], vec![0.9, 0.5, 0.2]).unwrap();
        let gf = genfun_of(&p).unwrap();
        let inv = reciprocal(&gf).unwrap();
        let n = 256;
        let f = maclaurin(&gf, n);
        let f_hat = maclaurin(&inv, n);
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let dev = series_product_check(&f, &f_hat, &e1).unwrap();
        assert!(dev <= 1e-10, "deviation {dev}");
    }

    #[test]
    fn partial_fraction_reconstruction() {
        // 1 + sum_i alpha_hat_i x / (1 - lambda_hat_i x) equals q(x) / r(x)
        // away from the poles.
        let p = BltParams::new(vec![0.2, 0.1], vec![0.8, 0.4]).unwrap();
        let inv = invert_params(&p).unwrap();
        let gf = genfun_of(&p).unwrap();
        let f_hat = reciprocal(&gf).unwrap();
        for k in 0..64 {
            let x = -0.9 + 1.8 * (k as f64) / 63.0;
            let direct = f_hat.eval(x);
            let pf: f64 = 1.0
                + inv
                    .alpha_hat()
                    .iter()
                    .zip(inv.lambda_hat())
                    .map(|(a, l)| a * x / (1.0 - l * x))
                    .sum::<f64>();
            assert!((direct - pf).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn numerator_degree_tracks_regime() {
        let lt = BltParams::new(vec![0.2, 0.1], vec![0.8, 0.4]).unwrap();
        assert_eq!(genfun_of(&lt).unwrap().num().degree(), 2);
        let eq = BltParams::new(vec![0.4, 0.2], vec![0.8, 0.4]).unwrap();
        assert_eq!(genfun_of(&eq).unwrap().num().degree(), 1);
        let gt = BltParams::new(vec![0.2, 0.45], vec![0.8, 0.4]).unwrap();
        assert_eq!(genfun_of(&gt).unwrap().num().degree(), 2);
    }

    #[test]
    fn inverse_coeffs_via_reciprocal_match_inverse_params() {
        let p = BltParams::new(vec![0.25, 0.2, 0.1], vec![0.85, 0.6, 0.3]).unwrap();
        let inv = invert_params(&p).unwrap();
        let via_params = toeplitz_coeffs(&inv.to_params(), 64);
        let via_series = maclaurin(&reciprocal(&genfun_of(&p).unwrap()).unwrap(), 64);
        assert_close(&via_series, &via_params, 1e-12);
    }
}
