use pmaxent_core::concavity::random_ulc;
use pmaxent_core::flow::{
    d2_d_formula, d2_lambda_formula, d_d_formula, d_d_score_form, d_lambda_formula, entropy_curve,
    u_flow_rhs, u_flow_rhs_ratio_form,
};
use pmaxent_core::transforms::u_map;
use pmaxent_core::{Pmf, TruncationPolicy};
use proptest::prelude::*;

fn tight() -> TruncationPolicy {
    TruncationPolicy::new(1e-15, 4096).unwrap()
}

fn lambdas() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), Just(2.0), Just(5.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivative_signs(seed in any::<u64>(), lambda in lambdas(), alpha in 0.05f64..1.0) {
        let x = random_ulc(lambda, 30, seed).unwrap();
        let p = u_map(&x, alpha, lambda, &tight()).unwrap();
        prop_assert!(d_lambda_formula(&p, lambda, alpha).unwrap() <= 1e-9);
        prop_assert!(d2_lambda_formula(&p, lambda, alpha).unwrap() <= 1e-9);
        let dd = d_d_formula(&p, lambda, alpha).unwrap();
        prop_assert!(dd >= -1e-12);
        prop_assert!((dd - d_d_score_form(&p, lambda, alpha).unwrap()).abs() <= 1e-10 * dd.max(1.0));
        prop_assert!(p.variance() <= lambda + 1e-9);
        prop_assert!(d2_d_formula(&p, lambda, alpha).unwrap() >= -1e-9);
    }

    #[test]
    fn strict_decrease_at_one(seed in any::<u64>(), lambda in lambdas()) {
        let x = random_ulc(lambda, 30, seed).unwrap();
        let pois = Pmf::poisson(lambda, &tight()).unwrap();
        prop_assume!(x.total_variation(&pois) > 1e-3);
        prop_assert!(d_lambda_formula(&x, lambda, 1.0).unwrap() < -1e-12);
    }

    #[test]
    fn rhs_reformulation(seed in any::<u64>(), lambda in lambdas(), alpha in 0.05f64..1.0) {
        let x = random_ulc(lambda, 30, seed).unwrap();
        let p = u_map(&x, alpha, lambda, &tight()).unwrap();
        let a = u_flow_rhs(&p, lambda, alpha);
        let b = u_flow_rhs_ratio_form(&p, lambda, alpha);
        for z in 0..a.len() {
            prop_assert!((a[z] - b[z]).abs() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn curve_rows_decompose(seed in any::<u64>()) {
        let x = random_ulc(2.0, 40, seed).unwrap();
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
        let c = entropy_curve(&x, 2.0, &grid, &tight()).unwrap();
        for r in &c.rows {
            prop_assert!((r.h - r.lambda_functional + r.d).abs() <= 1e-9 + r.deficit_budget);
        }
        prop_assert!(c.max_first_difference() <= 1e-10);
        prop_assert!(c.max_second_difference() <= 1e-8);
    }
}

#[test]
fn poisson_derivatives_vanish() {
    for &lambda in &[0.5, 2.0, 9.0] {
        let pois = Pmf::poisson(lambda, &tight()).unwrap();
        for k in 1..=10 {
            let alpha = k as f64 / 10.0;
            let p = u_map(&pois, alpha, lambda, &tight()).unwrap();
            assert!(
                p.total_variation(&pois) <= 1e-10,
                "λ = {lambda}, α = {alpha}: {}",
                p.total_variation(&pois)
            );
            assert!(d_lambda_formula(&p, lambda, alpha).unwrap().abs() <= 1e-12);
            // Second-derivative formulas carry a (λ/α)² prefactor on rounding noise.
            let scale = (lambda / alpha).powi(2).max(1.0);
            assert!(d2_lambda_formula(&p, lambda, alpha).unwrap().abs() <= 1e-12 * scale);
            assert!(d_d_formula(&p, lambda, alpha).unwrap().abs() <= 1e-12);
            let v = d2_d_formula(&p, lambda, alpha).unwrap();
            assert!(v.abs() <= 1e-12 * scale, "λ = {lambda}, α = {alpha}: {v}");
        }
    }
}
