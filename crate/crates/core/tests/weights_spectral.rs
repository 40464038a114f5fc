use std::f64::consts::PI;

use fraccable::specfun::{gamma_fn, mittag_leffler_neg, rl_power_derivative, MLSeriesParams};
use fraccable::spectral::{
    symbol_closed_form, symbol_series_differenced, toeplitz_det_ratios, toeplitz_min_eigen,
};
use fraccable::weights::{
    apply_discrete_operator, gf_expand_oracle, weights_for, Family, StartingWeights, ThetaScheme,
};
use proptest::prelude::*;

fn fbt() -> impl Strategy<Value = ThetaScheme> {
    (0.05f64..=1.0, -2.0f64..0.49).prop_map(|(a, t)| ThetaScheme::new(Family::Fbt, a, t).unwrap())
}

fn fbn() -> impl Strategy<Value = ThetaScheme> {
    (0.05f64..=1.0, 0.0f64..=1.0).prop_map(|(a, u)| {
        let lo = -1.0 / (2.0 * a);
        ThetaScheme::new(Family::Fbn, a, lo + (1.0 - lo) * u).unwrap()
    })
}

fn any_scheme() -> impl Strategy<Value = ThetaScheme> {
    prop_oneof![fbt(), fbn()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recursion_matches_series_oracle(s in any_scheme()) {
        let w = weights_for(s, 60).unwrap();
        let o = gf_expand_oracle(s, 60).unwrap();
        for k in 0..=60 {
            prop_assert!((w.omega[k] - o.omega[k]).abs() <= 1e-12 * o.omega[k].abs().max(1.0), "k = {k}");
        }
        prop_assert!((w.omega[0] - s.leading_weight()).abs() <= 1e-14 * s.leading_weight());
    }

    #[test]
    fn starting_weights_make_the_operator_exact(
        s in any_scheme(),
        sigma in prop::collection::btree_set(1u32..30, 1..4),
        tau in 0.01f64..0.2,
    ) {
        let sigma: Vec<f64> = sigma.into_iter().map(|v| v as f64 / 10.0).collect();
        let n_max = 30;
        let w = weights_for(s, n_max).unwrap();
        let sw = StartingWeights::build(&w, &sigma, n_max).unwrap();
        for &p in &sigma {
            let samples: Vec<f64> = (0..=n_max).map(|k| (k as f64 * tau).powf(p)).collect();
            for n in 1..=n_max {
                let got = apply_discrete_operator(&w, Some(&sw), &samples, n, tau).unwrap();
                let want = rl_power_derivative(s.alpha, p, n as f64 * tau);
                prop_assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "sigma {p} n {n}");
            }
        }
    }

    #[test]
    fn closed_form_symbol_matches_the_series(s in any_scheme(), x in 0.2f64..6.0) {
        prop_assume!((x - PI).abs() > 0.2);
        let w = weights_for(s, 4000).unwrap();
        let series = symbol_series_differenced(&w, x, 3).unwrap();
        let closed = symbol_closed_form(s, x).unwrap().f_value;
        prop_assert!((series - closed).abs() <= 1e-7 * (1.0 + closed.abs()), "{series} vs {closed}");
    }

    #[test]
    fn toeplitz_matrices_are_positive_semidefinite(s in any_scheme(), n in 2usize..80) {
        let w = weights_for(s, n).unwrap();
        prop_assert!(toeplitz_min_eigen(&w, n, 0.0).unwrap() >= -1e-10);
    }
}

#[test]
fn determinant_ratios_are_positive() {
    let w = weights_for(ThetaScheme::new(Family::Fbn, 0.7, 0.2).unwrap(), 64).unwrap();
    let r = toeplitz_det_ratios(&w, 64).unwrap();
    assert!(r.iter().all(|&v| v > 0.0));
}

#[test]
fn gamma_function_recurrence_and_known_values() {
    assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
    for &x in &[0.1, 0.7, 1.3, 2.9, 7.25] {
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        assert!((lhs - rhs).abs() <= 1e-13 * lhs);
    }
    assert!(gamma_fn(0.0).is_err());
}

#[test]
fn mittag_leffler_reduces_to_exponential() {
    let p = MLSeriesParams::new(1.0);
    for &t in &[0.0, 0.3, 1.0, 2.0] {
        let v = mittag_leffler_neg(&p, t).unwrap();
        assert!((v - (-t).exp()).abs() < 1e-13, "t = {t}");
    }
}
