use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use sechlab::cf_lab::{
    apply_a, diag_residual, factorization_residual, joint_cf, marginal_cf, residual_polya,
    solve_doubling, zero_free_check, DoublingSolution, DyadicGridFn,
};
use sechlab::sech::{ControlDistribution, ControlKind, NamedCharFn, SechDistribution};
use sechlab::CharFn;

fn laws() -> Vec<Box<dyn CharFn>> {
    vec![
        Box::new(SechDistribution::new(0.7).unwrap()),
        Box::new(ControlDistribution::new(ControlKind::Normal, 1.0).unwrap()),
        Box::new(ControlDistribution::new(ControlKind::Laplace, 1.0).unwrap()),
        Box::new(ControlDistribution::new(ControlKind::Uniform, 1.0).unwrap()),
    ]
}

proptest! {
    #[test]
    fn diagonal_identity(s in -6.0f64..6.0) {
        for f in laws() {
            let gap = (factorization_residual(&*f, s, s) - diag_residual(&*f, s)).abs();
            prop_assert!(gap <= 4.0 * f64::EPSILON, "{}: {gap}", f.name());
        }
    }

    #[test]
    fn sech_solves_both_equations(s in -4.0f64..4.0, t in -4.0f64..4.0, a in 0.2f64..3.0) {
        let sech = SechDistribution::new(a).unwrap();
        prop_assert!(residual_polya(&sech, t).abs() <= 1e-12);
        prop_assert!(factorization_residual(&sech, s, t).abs() <= 1e-12);
    }

    #[test]
    fn forms_have_equal_marginals(s in -4.0f64..4.0) {
        for f in laws() {
            prop_assert!((joint_cf(&*f, s, 0.0) - marginal_cf(&*f, s)).abs() <= 1e-15);
            prop_assert!((joint_cf(&*f, 0.0, s) - marginal_cf(&*f, s)).abs() <= 1e-15);
        }
    }

    #[test]
    fn doubling_scale_covariance(a in 0.5f64..2.0, t in 0.0f64..2.0) {
        let sigma = 1.1;
        let lhs = DoublingSolution::new(a * sigma, 2.0, 40).unwrap().eval(t).unwrap();
        let rhs = DoublingSolution::new(sigma, 2.0 * a, 40).unwrap().eval(a * t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }
}

#[test]
fn doubling_converges_in_depth() {
    let sech = SechDistribution::standard();
    let errors: Vec<f64> = [15, 20, 25, 30]
        .iter()
        .map(|&d| {
            solve_doubling(FRAC_PI_2, 4.0, d)
                .unwrap()
                .sup_distance_to(|t| sech.cf(t))
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[3] <= 1e-6);
}

#[test]
fn zero_free_propagation() {
    let sech = SechDistribution::standard();
    let grid = DyadicGridFn::from_char_fn(&sech, 8.0, 12).unwrap();
    let residual = grid
        .points()
        .map(|(t, _)| residual_polya(&sech, t).abs())
        .fold(0.0, f64::max);
    assert!(residual <= 1e-12);
    assert!(grid.values().last().unwrap().abs() > 0.0);
    assert!(zero_free_check(&grid, 1e-12).zero_free);

    let solved = solve_doubling(2.0, 6.0, 40).unwrap();
    assert!(zero_free_check(&solved, 1e-12).zero_free);
}

#[test]
fn operator_fixes_sech_only() {
    let sech = SechDistribution::standard();
    let grid = DyadicGridFn::from_char_fn(&sech, 4.0, 10).unwrap();
    assert!(apply_a(&grid).sup_distance(&grid) < 1e-9);
    let normal = ControlDistribution::new(ControlKind::Normal, 1.0).unwrap();
    let grid = DyadicGridFn::from_char_fn(&normal, 4.0, 10).unwrap();
    assert!(apply_a(&grid).sup_distance(&grid) > 1e-2);
}

#[test]
fn uniform_cf_has_a_zero() {
    let uniform = NamedCharFn::new("sinc", |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t });
    let grid = DyadicGridFn::from_char_fn(&uniform, 8.0, 10).unwrap();
    let report = zero_free_check(&grid, 1e-12);
    assert!(!report.zero_free);
    assert!((report.first_violation.unwrap() - std::f64::consts::PI).abs() < 1e-3);
}
