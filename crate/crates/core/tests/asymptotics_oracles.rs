mod oracle;

use everett::asymptotics::{
    apportion, chebyshev_floor, lagrange_fractions, modal_class, residual_measure,
    stirling_objective, typicality_measure,
};
use everett::branching::{Coefficients, CountClass};
use num_rational::BigRational;
use proptest::prelude::*;

fn weights(max_m: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..1000, 1..=max_m)
}

fn coeffs(w: &[u32]) -> Coefficients {
    Coefficients::from_measures(&oracle::float_measures(w)).unwrap()
}

#[test]
fn typicality_of_fair_ten() {
    let c = Coefficients::uniform(2).unwrap();
    let t = typicality_measure(&c, 10, 0.2).unwrap();
    let exact = oracle::typicality(&[oracle::ratio(1, 2), oracle::ratio(1, 2)], 10, &oracle::ratio(1, 5));
    assert_eq!(exact, oracle::ratio(912, 1024));
    assert!((t.linear() - 912.0 / 1024.0).abs() < 1e-12);
}

#[test]
fn residual_of_fair_ten() {
    let c = Coefficients::uniform(2).unwrap();
    let r = residual_measure(&c, 10);
    assert_eq!(r.class, CountClass::new(vec![5, 5]));
    assert!((r.residual.linear() - 0.75390625).abs() < 1e-12);
}

#[test]
fn residual_grows_with_n() {
    let c = Coefficients::uniform(2).unwrap();
    let (mut prev, mut prev_even) = (0.0, 0.0);
    for n in 1..=1000u64 {
        let r = residual_measure(&c, n).residual.linear();
        assert!(r >= prev - 1e-12, "R_{n} = {r} < {prev}");
        if n % 2 == 0 {
            assert!(r > prev_even, "R_{n} did not increase");
            prev_even = r;
        }
        prev = r;
    }
    assert!(prev > 0.97);
}

#[test]
fn single_outcome_has_no_residual() {
    let c = Coefficients::uniform(1).unwrap();
    for n in [1, 10, 1000] {
        assert_eq!(residual_measure(&c, n).residual.linear(), 0.0);
        assert_eq!(typicality_measure(&c, n, 0.01).unwrap().linear(), 1.0);
    }
}

#[test]
fn modal_examples() {
    let c = Coefficients::from_measures(&[0.3, 0.7]).unwrap();
    assert_eq!(modal_class(&c, 10).class, CountClass::new(vec![3, 7]));
    let fair = Coefficients::uniform(2).unwrap();
    let m = modal_class(&fair, 11);
    assert!(m.tie());
}

#[test]
fn large_n_modal_is_near_fractions() {
    let c = Coefficients::from_measures(&[0.25, 0.25, 0.5]).unwrap();
    let m = modal_class(&c, 20_000);
    assert_eq!(m.class, CountClass::new(vec![5000, 5000, 10000]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lagrange_fractions_are_the_measures(w in weights(4)) {
        let c = coeffs(&w);
        let sol = lagrange_fractions(&c, None);
        prop_assert_eq!(sol.fractions, c.measures());
    }

    #[test]
    fn stirling_gradient_vanishes_at_fractions(w in weights(4), n in 10u64..5000) {
        let c = coeffs(&w);
        let sol = lagrange_fractions(&c, Some(n));
        let lambda = sol.lagrange_multiplier.unwrap();
        let p = c.measures();
        let ln_p: Vec<f64> = p.iter().map(|x| x.ln()).collect();
        let x: Vec<f64> = p.iter().map(|pi| pi * n as f64).collect();
        for i in 0..p.len() {
            let h = 1e-5 * x[i];
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let g = (stirling_objective(n as f64, &up, &ln_p, lambda)
                - stirling_objective(n as f64, &down, &ln_p, lambda))
                / (2.0 * h);
            prop_assert!(g.abs() < 1e-6, "gradient {} at component {}", g, i);
        }
    }

    #[test]
    fn modal_class_is_exchange_stable(w in weights(4), n in 1u64..=200) {
        let c = coeffs(&w);
        let p = c.measures();
        let m = modal_class(&c, n);
        let k = m.class.counts();
        prop_assert_eq!(k.iter().sum::<u64>(), n);
        for i in 0..p.len() {
            for j in 0..p.len() {
                if i != j && k[i] > 0 {
                    // moving one count from i to j multiplies the measure by
                    // p_j k_i / (p_i (k_j + 1))
                    prop_assert!(p[j] * k[i] as f64 <= p[i] * (k[j] + 1) as f64 * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn modal_class_is_exhaustive_argmax(w in weights(3), n in 1u64..=30) {
        let p = oracle::probabilities(&w);
        let c = coeffs(&w);
        let m = modal_class(&c, n);
        let best = oracle::classes(p.len(), n)
            .iter()
            .map(|k| oracle::class_measure(&p, k))
            .max()
            .unwrap();
        let got = oracle::class_measure(&p, m.class.counts());
        let ratio = oracle::to_f64(&(got / best));
        prop_assert!(ratio > 1.0 - 1e-9);
    }

    #[test]
    fn typicality_matches_rational_oracle(w in weights(3), n in 1u64..=40, e in 1i64..=30) {
        let p = oracle::probabilities(&w);
        let c = coeffs(&w);
        let eps = oracle::ratio(e, 100);
        let expected = oracle::to_f64(&oracle::typicality(&p, n, &eps));
        let got = typicality_measure(&c, n, e as f64 / 100.0).unwrap().linear();
        prop_assert!((got - expected).abs() < 1e-12, "{} vs {}", got, expected);
    }

    #[test]
    fn typicality_respects_chebyshev_floor(w in weights(4), n in 1u64..=400, e in 1i64..=50) {
        let c = coeffs(&w);
        let eps = e as f64 / 100.0;
        let t = typicality_measure(&c, n, eps).unwrap().linear();
        prop_assert!(t >= chebyshev_floor(&c, n, eps) - 1e-12);
        prop_assert!(t <= 1.0 + 1e-12);
    }

    #[test]
    fn apportion_hits_total_within_one(w in weights(4), n in 0u64..=2000) {
        let c = coeffs(&w);
        let k = apportion(&c, n);
        prop_assert_eq!(k.total(), n);
        for (ki, pi) in k.counts().iter().zip(c.measures()) {
            prop_assert!((*ki as f64 - pi * n as f64).abs() < 1.0 + 1e-9);
        }
    }

    #[test]
    fn residual_is_complement_of_apportioned_class(w in weights(3), n in 1u64..=60) {
        let p = oracle::probabilities(&w);
        let c = coeffs(&w);
        let r = residual_measure(&c, n);
        let exact: BigRational = oracle::class_measure(&p, r.class.counts());
        prop_assert!((r.residual.linear() - (1.0 - oracle::to_f64(&exact))).abs() < 1e-10);
    }
}
