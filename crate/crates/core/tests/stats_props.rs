use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use sechlab::stats_tests::{
    dcov_permutation_test, dcov_statistic, dcov_statistic_naive, ecf, kolmogorov_q, ks_two_sample,
};
use sechlab::RngStream;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-15
}

proptest! {
    #[test]
    fn fast_dcov_matches_naive(pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..60)) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assert!(close(dcov_statistic(&x, &y), dcov_statistic_naive(&x, &y), 1e-9));
    }

    #[test]
    fn dcov_shift_and_scale(
        pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 5..40),
        a in -50.0f64..50.0,
        b in -50.0f64..50.0,
        c in 0.1f64..10.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let base = dcov_statistic(&x, &y);
        let xs: Vec<f64> = x.iter().map(|v| v + a).collect();
        let ys: Vec<f64> = y.iter().map(|v| v + b).collect();
        prop_assert!(close(dcov_statistic(&xs, &ys), base, 1e-8));
        let xc: Vec<f64> = x.iter().map(|v| c * v).collect();
        let yc: Vec<f64> = y.iter().map(|v| c * v).collect();
        prop_assert!(close(dcov_statistic(&xc, &yc), c * c * base, 1e-8));
    }

    #[test]
    fn dcov_is_symmetric_and_nonnegative(pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..40)) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let d = dcov_statistic(&x, &y);
        prop_assert!(d >= -1e-12);
        prop_assert!(close(d, dcov_statistic(&y, &x), 1e-9));
    }

    #[test]
    fn kolmogorov_q_is_a_survival_function(l in 0.0f64..6.0, dl in 0.0f64..1.0) {
        let q = kolmogorov_q(l);
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!(kolmogorov_q(l + dl) <= q);
    }

    #[test]
    fn ks_p_decreases_with_d(shift in 0.0f64..3.0, extra in 0.0f64..3.0) {
        let a: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let b1: Vec<f64> = a.iter().map(|v| v + shift).collect();
        let b2: Vec<f64> = a.iter().map(|v| v + shift + extra).collect();
        let r1 = ks_two_sample(&a, &b1).unwrap();
        let r2 = ks_two_sample(&a, &b2).unwrap();
        prop_assert!(r2.statistic >= r1.statistic);
        prop_assert!(r2.p_value <= r1.p_value);
    }

    #[test]
    fn symmetrized_ecf_is_cosine_mean(batch in prop::collection::vec(-20.0f64..20.0, 1..50), t in -5.0f64..5.0) {
        let mut sym = batch.clone();
        sym.extend(batch.iter().map(|v| -v));
        let cosine = batch.iter().map(|v| (t * v).cos()).sum::<f64>() / batch.len() as f64;
        prop_assert!((ecf(&sym, t) - cosine).abs() <= 1e-12);
    }
}

#[test]
fn permutation_test_is_valid_under_independence() {
    let alpha = 0.05;
    let permutations = 99;
    let mut rejections = 0;
    for seed in 0..400 {
        let mut rng = RngStream::new(seed);
        let x: Vec<f64> = (0..60).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..60).map(|_| rng.random::<f64>()).collect();
        let report = dcov_permutation_test(&x, &y, permutations, &mut rng).unwrap();
        let grid = report.p_value * (permutations + 1) as f64;
        assert!((grid - grid.round()).abs() < 1e-9);
        assert!(report.p_value >= 1.0 / (permutations + 1) as f64);
        if report.p_value <= alpha {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / 400.0;
    assert!(rate <= alpha + 0.02, "{rate}");
}

#[test]
fn perfect_dependence_hits_the_floor() {
    let mut rng = RngStream::new(1);
    let x: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut rng)).collect();
    let report = dcov_permutation_test(&x, &x, 199, &mut rng).unwrap();
    assert_eq!(report.p_value, 1.0 / 200.0);
}
