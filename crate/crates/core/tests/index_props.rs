use std::f64::consts::PI;

use proptest::prelude::*;
use sechlab::cheb_index::{cheb_t, index_mean, index_pmf, pgf_eval};
use sechlab::RngStream;

/// Coefficient of `z^k` in `1/T_n(1/z)` from the partial fractions over the
/// zeros of `T_n`.
fn closed_form(n: u32, k: u64) -> f64 {
    (1..=n)
        .map(|j| {
            let theta = (2 * j - 1) as f64 * PI / (2 * n) as f64;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sign * theta.sin() * theta.cos().powi(k as i32 - 1)
        })
        .sum::<f64>()
        / n as f64
}

#[test]
fn pmf_invariants_up_to_50() {
    for n in 1..=50 {
        let dist = index_pmf(n, 1e-12).unwrap();
        assert!(dist.probs().iter().all(|&p| p >= -1e-14));
        assert!(dist.support().iter().all(|&k| k % 2 == n as u64 % 2));
        assert_eq!(dist.support()[0], n as u64);
        let mass: f64 = dist.probs().iter().sum();
        assert!((mass + dist.tail_bound() - 1.0).abs() < 1e-12, "n = {n}");
        assert!(dist.tail_bound() <= 1e-12);
        for i in 1..=9 {
            let z = 0.1 * i as f64;
            let gap = (dist.pgf(z) - pgf_eval(n, z).unwrap()).abs();
            assert!(gap <= 1e-10, "n = {n}, z = {z}: {gap}");
        }
    }
}

#[test]
fn matches_partial_fractions() {
    for n in [4, 7, 16, 33] {
        let dist = index_pmf(n, 1e-12).unwrap();
        for (&k, &p) in dist.support().iter().zip(dist.probs()).take(200) {
            assert!((p - closed_form(n, k)).abs() <= 1e-13, "n = {n}, k = {k}");
        }
    }
}

#[test]
fn means_are_squares() {
    for n in 1..=20 {
        assert_eq!(index_mean(n), (n * n) as f64);
        let dist = index_pmf(n, 1e-14).unwrap();
        assert!((dist.mean() / (n * n) as f64 - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn sampled_mean_within_one_percent() {
    let mut dist = index_pmf(8, 1e-12).unwrap();
    let mut rng = RngStream::new(3);
    let draws = 1_000_000;
    let mut total = 0u64;
    for _ in 0..draws {
        let k = dist.sample(&mut rng).unwrap();
        assert_eq!(k % 2, 0);
        total += k;
    }
    let mean = total as f64 / draws as f64;
    assert!((mean / 64.0 - 1.0).abs() < 0.01, "{mean}");
}

proptest! {
    #[test]
    fn chebyshev_identities(n in 0u32..40, theta in 0.0f64..PI) {
        prop_assert!((cheb_t(n, theta.cos()) - (n as f64 * theta).cos()).abs() <= 1e-10);
        let h = theta / 2.0;
        let lhs = cheb_t(n, h.cosh());
        let rhs = (n as f64 * h).cosh();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn pgf_is_a_pgf(n in 1u32..30, z in 1e-6f64..1.0) {
        let v = pgf_eval(n, z).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        prop_assert!(pgf_eval(n, 1.0).unwrap() == 1.0);
    }
}
