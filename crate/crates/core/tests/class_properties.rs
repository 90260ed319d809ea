use pmaxent_core::concavity::{
    bernoulli_sum, conditional_tail_bound, conditional_tail_ratio, is_log_concave,
    is_score_decreasing, is_ultra_log_concave, random_interval_pmf, random_log_concave, random_ulc,
    score, score_projection_residual, tilt_to_mean, ulc_order_n_margin,
};
use pmaxent_core::TruncationPolicy;
use proptest::prelude::*;

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn lambdas() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), Just(2.0), Just(5.0), 0.2f64..8.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ulc_iff_score_decreasing(seed in any::<u64>()) {
        for p in [random_interval_pmf(12, seed).unwrap(), random_ulc(2.0, 25, seed).unwrap()] {
            let ulc = is_ultra_log_concave(&p, 1e-9).unwrap().pass;
            prop_assert_eq!(ulc, is_score_decreasing(&p, p.mean()).unwrap());
        }
    }

    #[test]
    fn ulc_closed_under_convolution(a in any::<u64>(), b in any::<u64>(), l1 in lambdas(), l2 in lambdas()) {
        let p = random_ulc(l1, 30, a).unwrap();
        let q = random_ulc(l2, 30, b).unwrap();
        let pq = p.convolve(&q, &policy()).unwrap();
        prop_assert!(is_ultra_log_concave(&pq, 1e-9).unwrap().pass);
        prop_assert!((pq.mean() - l1 - l2).abs() <= 1e-9);
    }

    #[test]
    fn lc_closed_under_convolution(a in any::<u64>(), b in any::<u64>()) {
        let p = random_log_concave(30, a).unwrap();
        let q = random_log_concave(30, b).unwrap();
        let pq = p.convolve(&q, &policy()).unwrap();
        prop_assert!(is_log_concave(&pq, 1e-9).unwrap().pass);
    }

    #[test]
    fn bernoulli_sums_are_ulc_of_order_n(ps in prop::collection::vec(0.0f64..=1.0, 1..25)) {
        let s = bernoulli_sum(&ps).unwrap();
        let margins = ulc_order_n_margin(&s, ps.len()).unwrap();
        prop_assert!(margins.iter().all(|&m| m >= -1e-9));
        if s.support().interval {
            prop_assert!(is_ultra_log_concave(&s, 1e-9).unwrap().pass);
        }
    }

    #[test]
    fn ulc_moment_and_tail_facts(seed in any::<u64>(), lambda in lambdas()) {
        let p = random_ulc(lambda, 30, seed).unwrap();
        prop_assert!(p.variance() <= p.mean() + 1e-9);
        prop_assert!(conditional_tail_ratio(&p).unwrap() <= conditional_tail_bound(lambda) + 1e-9);
    }

    #[test]
    fn score_has_zero_mean(seed in any::<u64>(), lambda in lambdas()) {
        let p = random_ulc(lambda, 30, seed).unwrap();
        let rho = score(&p, p.mean()).unwrap();
        let total: f64 = (0..p.len()).map(|i| p.at(i) * rho.get(i).unwrap()).sum();
        prop_assert!(total.abs() <= 1e-9);
    }

    #[test]
    fn tilting_hits_mean(seed in any::<u64>(), lambda in 0.3f64..5.0) {
        let p = random_interval_pmf(12, seed).unwrap();
        prop_assume!(lambda < (p.len() - 1) as f64);
        prop_assert!((tilt_to_mean(&p, lambda).unwrap().mean() - lambda).abs() <= 1e-9);
    }

    #[test]
    fn projection_identity(a in any::<u64>(), b in any::<u64>(), l1 in lambdas(), l2 in lambdas()) {
        let u = random_ulc(l1, 25, a).unwrap();
        let v = random_ulc(l2, 25, b).unwrap();
        prop_assert!(score_projection_residual(&u, &v).unwrap() <= 1e-9);
    }
}
