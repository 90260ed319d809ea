use pmaxent_core::concavity::{random_interval_pmf, random_ulc, score, tilt_to_mean};
use pmaxent_core::functionals::{
    cr_functional_1, cr_functional_2, delta, delta_star, entropy, lambda_functional,
    mm_infty_generator, relative_entropy, relative_entropy_to_poisson, symmetrized_kl,
};
use pmaxent_core::transforms::u_map;
use pmaxent_core::{Pmf, TruncationPolicy};
use proptest::prelude::*;

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn positive_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..10.0, 1..20)
}

proptest! {
    #[test]
    fn gibbs(a in any::<u64>(), b in any::<u64>()) {
        let p = random_interval_pmf(10, a).unwrap();
        let q = random_interval_pmf(10, b).unwrap();
        let d = relative_entropy(&p, &q).value;
        prop_assert!(d >= -1e-12);
        prop_assert_eq!(relative_entropy(&p, &p).value, 0.0);
        prop_assert!(symmetrized_kl(&p, &q).value >= -1e-12);
    }

    #[test]
    fn log_sum_inequality(pairs in prop::collection::vec((1e-3f64..10.0, 1e-3f64..10.0), 1..20)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        let lhs: f64 = a.iter().zip(&b).map(|(x, y)| x * (x / y).ln()).sum();
        prop_assert!(lhs >= sa * (sa / sb).ln() - 1e-10);
    }

    #[test]
    fn decomposition(seed in any::<u64>(), lambda in 0.2f64..8.0) {
        let p = random_interval_pmf(20, seed).unwrap();
        let h = entropy(&p);
        let d = relative_entropy_to_poisson(&p, lambda).unwrap();
        let l = lambda_functional(&p, lambda).unwrap();
        prop_assert!((h.value + d.value - l.value).abs() <= 1e-10);
        let pois = Pmf::poisson(lambda, &policy()).unwrap();
        let table = relative_entropy(&p, &pois);
        // A truncated Poisson table may stop short of P's support.
        if p.len() <= pois.len() {
            prop_assert!((table.value - d.value).abs() <= 1e-9 + table.deficit_budget);
        } else {
            prop_assert!(table.is_infinite());
        }
    }

    #[test]
    fn lambda_reduction(seed in any::<u64>(), lambda in 0.3f64..6.0) {
        let x = random_ulc(lambda, 30, seed).unwrap();
        let pois = Pmf::poisson(lambda, &policy()).unwrap();
        let lx = lambda_functional(&x, lambda).unwrap().value;
        let lz = lambda_functional(&pois, lambda).unwrap();
        let hz = entropy(&pois);
        prop_assert!(lx <= lz.value + 1e-12 + lz.deficit_budget);
        prop_assert!(entropy(&x).value <= hz.value + 1e-12 + hz.deficit_budget);
    }

    #[test]
    fn cramer_rao_middle_expression(seed in any::<u64>(), lambda in 0.3f64..5.0) {
        let y = random_interval_pmf(12, seed).unwrap();
        prop_assume!(lambda < (y.len() - 1) as f64);
        let y = tilt_to_mean(&y, lambda).unwrap();
        let p = u_map(&y, 0.5, lambda, &policy()).unwrap();
        let rho = score(&p, lambda).unwrap();
        let fisher: f64 = (0..p.len()).map(|i| p.at(i) * rho.get(i).unwrap().powi(2)).sum();
        // ρ(hi) = −1 stands in for the truncated tail, so drop that term.
        let top = p.at(p.len() - 1);
        let c1 = cr_functional_1(&p, lambda).unwrap();
        prop_assert!((c1 - 1.0 - (fisher - top)).abs() <= 1e-9);
        prop_assert!(c1 >= 1.0 - 1e-9);
        prop_assert!(cr_functional_2(&p, lambda).unwrap() >= 1.0 / lambda - 1e-9);
    }

    #[test]
    fn adjointness(p in positive_vec(), q in positive_vec()) {
        let dp = delta(&p);
        let dq = delta_star(&q);
        let at = |v: &[f64], x: usize| v.get(x).copied().unwrap_or(0.0);
        let n = p.len().max(q.len()) + 1;
        let lhs: f64 = (0..n).map(|x| at(&dp, x) * at(&q, x)).sum();
        let rhs: f64 = (0..n).map(|x| at(&p, x) * at(&dq, x)).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn generator_duality(seed in any::<u64>(), alpha in 0.05f64..1.0, f in prop::collection::vec(-3.0f64..3.0, 40)) {
        // Σ (λ/α)Δ*(Pρ) f = −(1/α) Σ P·Lf for a law P of exact finite support.
        let p = random_ulc(2.0, 30, seed).unwrap();
        let lambda = p.mean();
        let n = p.len();
        let pr: Vec<f64> = (0..n).map(|z| (z + 1) as f64 * p.at(z + 1) / lambda - p.at(z)).collect();
        let ds = delta_star(&pr);
        let f = &f[..n + 1];
        let lhs: f64 = (0..=n).map(|z| lambda / alpha * ds[z] * f[z]).sum();
        let lf = mm_infty_generator(f, lambda);
        let rhs: f64 = -(0..n).map(|z| p.at(z) * lf[z]).sum::<f64>() / alpha;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }
}
