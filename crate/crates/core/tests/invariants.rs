//! Property tests for the structural invariants that hold on every strictly
//! valid parameter draw, with proptest shrinking doing the adversarial work.

use proptest::prelude::*;

use blt_core::blt::{
    invert_params, invert_params_lenient, materialize, regime_of, toeplitz_coeffs, BltParams,
    RegimeTag,
};
use blt_core::genfun::{genfun_of, maclaurin, reciprocal, series_product_check};
use blt_core::matrix::Mat;
use blt_core::poly::{build_p, build_q, build_r, roots_companion};

/// Strictly valid parameters: stratified distinct decays in `(0.05, 0.95)`,
/// positive scales with a controlled sum, kept 0.02 away from the regime
/// boundary (the exact boundary is covered by dedicated EQ1 tests).
fn params_strategy(max_d: usize) -> impl Strategy<Value = BltParams> {
    (1..=max_d)
        .prop_flat_map(|d| {
            (
                prop::collection::vec(0.0f64..1.0, d),
                prop::collection::vec(0.1f64..1.0, d),
                0.1f64..0.9,
            )
        })
        .prop_map(|(positions, weights, target)| {
            let d = positions.len();
            let width = 0.9 / d as f64;
            let mut lambda: Vec<f64> = positions
                .iter()
                .enumerate()
                .map(|(i, u)| 0.05 + (i as f64 + 0.15 + 0.7 * u) * width)
                .collect();
            lambda.reverse();
            let scale = target / weights.iter().sum::<f64>();
            let alpha: Vec<f64> = weights.iter().map(|w| w * scale).collect();
            BltParams::new(alpha, lambda).expect("strategy draws are finite")
        })
        .prop_filter("stay off the regime boundary", |p| {
            (p.decay_weighted_scale_sum() - 1.0).abs() >= 0.02
        })
}

proptest! {
    #[test]
    fn product_of_matrix_and_inverse_is_identity(params in params_strategy(8)) {
        let inv = invert_params(&params).unwrap();
        let n = 64;
        let c = toeplitz_coeffs(&params, n);
        let c_hat = toeplitz_coeffs(&inv.to_params(), n);
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let dev = series_product_check(&c, &c_hat, &e1).unwrap();
        prop_assert!(dev <= 1e-10, "deviation {dev}");
    }

    #[test]
    fn decay_ordering_holds_in_every_regime(params in params_strategy(8)) {
        let inv = invert_params(&params).unwrap();
        let mut chain = Vec::new();
        for (l, lh) in params.lambda().iter().zip(inv.lambda_hat()) {
            chain.push(*l);
            chain.push(*lh);
        }
        prop_assert!(chain.windows(2).all(|w| w[0] > w[1]), "chain {chain:?}");
        prop_assert!(inv.alpha_hat().iter().all(|&a| a < 0.0));
    }

    #[test]
    fn scale_sums_are_antisymmetric(params in params_strategy(8)) {
        let inv = invert_params(&params).unwrap();
        let forward: f64 = params.alpha().iter().sum();
        let backward: f64 = inv.alpha_hat().iter().sum();
        prop_assert!((forward + backward).abs() <= 1e-12);
    }

    #[test]
    fn inversion_is_permutation_invariant(params in params_strategy(6), seed in 0u64..1000) {
        // Shuffle the (alpha, lambda) pairs; the canonicalized inverse must
        // not change at all.
        let d = params.d();
        let mut order: Vec<usize> = (0..d).collect();
        let mut state = seed;
        for i in (1..d).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let alpha: Vec<f64> = order.iter().map(|&i| params.alpha()[i]).collect();
        let lambda: Vec<f64> = order.iter().map(|&i| params.lambda()[i]).collect();
        let shuffled = BltParams::new(alpha, lambda).unwrap();

        let a = invert_params(&params).unwrap();
        let b = invert_params(&shuffled).unwrap();
        prop_assert_eq!(a.lambda_hat(), b.lambda_hat());
        prop_assert_eq!(a.alpha_hat(), b.alpha_hat());
    }

    #[test]
    fn lt1_inversion_round_trips(params in params_strategy(8)) {
        prop_assume!(regime_of(&params) == RegimeTag::Lt1);
        let inv = invert_params(&params).unwrap();
        let back = invert_params_lenient(&inv.to_params()).unwrap();
        for (got, want) in back.lambda_hat().iter().zip(params.lambda()) {
            prop_assert!((got - want).abs() <= 1e-8, "lambda {got} vs {want}");
        }
        for (got, want) in back.alpha_hat().iter().zip(params.alpha()) {
            prop_assert!((got - want).abs() <= 1e-8, "alpha {got} vs {want}");
        }
    }

    #[test]
    fn series_and_recurrence_coefficients_agree(params in params_strategy(8)) {
        let gf = genfun_of(&params).unwrap();
        let n = 128;
        let series = maclaurin(&gf, n);
        let direct = toeplitz_coeffs(&params, n);
        for (s, d) in series.iter().zip(&direct) {
            prop_assert!((s - d).abs() <= 1e-12, "series {s} vs direct {d}");
        }
    }

    #[test]
    fn generating_function_times_reciprocal_is_one(params in params_strategy(8)) {
        let gf = genfun_of(&params).unwrap();
        let f_hat = reciprocal(&gf).unwrap();
        let n = 256;
        let a = maclaurin(&gf, n);
        let b = maclaurin(&f_hat, n);
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let dev = series_product_check(&a, &b, &e1).unwrap();
        prop_assert!(dev <= 1e-10, "deviation {dev}");
    }

    #[test]
    fn numerator_degree_tracks_regime(params in params_strategy(8)) {
        let gf = genfun_of(&params).unwrap();
        prop_assert_eq!(gf.num().degree(), params.d());
    }

    #[test]
    fn interior_roots_interlace_the_poles(params in params_strategy(8)) {
        let q = build_q(params.lambda()).unwrap();
        let p = build_p(params.alpha(), params.lambda()).unwrap();
        let r = build_r(&p, &q);
        let mu: Vec<f64> = params.lambda().iter().map(|l| 1.0 / l).collect();
        let roots = roots_companion(&r).unwrap();
        // mu_i < nu_i < mu_{i+1} for the d - 1 interior roots, all regimes.
        let interior: Vec<f64> = roots
            .roots()
            .iter()
            .copied()
            .filter(|&nu| nu > 0.0)
            .take(params.d() - 1)
            .collect();
        for (i, &nu) in interior.iter().enumerate() {
            prop_assert!(mu[i] < nu && nu < mu[i + 1], "nu {nu} outside ({}, {})", mu[i], mu[i + 1]);
        }
        // r(mu_i) = mu_i beta_i with alternating signs.
        for (i, &m) in mu.iter().enumerate() {
            let beta = p.eval(m);
            let r_at_mu = r.eval(m);
            prop_assert!((r_at_mu - m * beta).abs() <= 1e-12 * (1.0 + r_at_mu.abs()));
            if i % 2 == 0 {
                prop_assert!(r_at_mu > 0.0);
            } else {
                prop_assert!(r_at_mu < 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dense_product_is_identity(params in params_strategy(6)) {
        let inv = invert_params(&params).unwrap();
        let n = 48;
        let c = materialize(&params, n).unwrap();
        let c_inv = materialize(&inv.to_params(), n).unwrap();
        let dev = c.matmul(&c_inv).max_abs_diff(&Mat::identity(n));
        prop_assert!(dev <= 1e-10, "deviation {dev}");
    }
}
