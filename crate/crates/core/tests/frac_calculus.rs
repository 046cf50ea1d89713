use std::f64::consts::FRAC_2_SQRT_PI;

use approx::assert_relative_eq;
use fracwave_core::frac_calculus::*;
use fracwave_core::grid::interior;
use fracwave_core::special::gamma;
use fracwave_core::{FracError, GridFunction, TimeGrid};

fn unit(n: usize) -> TimeGrid {
    TimeGrid::new(1.0, n).unwrap()
}

#[test]
fn integral_of_one_at_final_time() {
    let one = GridFunction::constant(unit(256), 1.0).unwrap();
    let left = rl_integral_left(&one, 0.5).unwrap();
    let right = rl_integral_right(&one, 0.5).unwrap();
    assert_relative_eq!(left.last(), FRAC_2_SQRT_PI, max_relative = 1e-13);
    assert_relative_eq!(right.first(), FRAC_2_SQRT_PI, max_relative = 1e-13);
    assert_eq!(left.first(), 0.0);
    assert_eq!(right.last(), 0.0);
}

#[test]
fn first_order_integral_of_t_is_one_half() {
    let t = GridFunction::from_fn(unit(64), |t| t).unwrap();
    assert_relative_eq!(rl_integral_left(&t, 1.0).unwrap().last(), 0.5, max_relative = 1e-15);
}

#[test]
fn zero_maps_to_zero() {
    let zero = GridFunction::zeros(unit(64));
    for op in [rl_integral_left(&zero, 0.7).unwrap(), rl_integral_right(&zero, 0.7).unwrap()] {
        assert!(op.values().iter().all(|v| *v == 0.0));
    }
    assert!(rl_derivative_left(&zero, 1.5).unwrap().values().iter().all(|v| *v == 0.0));
    assert!(rl_derivative_right(&zero, 0.25).unwrap().values().iter().all(|v| *v == 0.0));
    assert_eq!(check_semigroup(&zero, 0.5, 0.5).unwrap(), 0.0);
    let t = GridFunction::from_fn(unit(64), |t| t).unwrap();
    assert_eq!(check_adjoint(&zero, &t, 0.5).unwrap(), 0.0);
    assert_eq!(check_exchange(&zero, 1.5).unwrap(), 0.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    let one = GridFunction::constant(unit(16), 1.0).unwrap();
    assert!(matches!(rl_integral_left(&one, 0.0), Err(FracError::InvalidOrder { .. })));
    assert!(matches!(rl_derivative_left(&one, 1.0), Err(FracError::UnsupportedOrder(_))));
    assert!(matches!(rl_derivative_left(&one, 2.0), Err(FracError::UnsupportedOrder(_))));
    assert!(matches!(GridFunction::new(unit(2), vec![0.0, f64::NAN, 1.0]), Err(FracError::InvalidInput(1))));
    let coarse = GridFunction::constant(unit(2), 1.0).unwrap();
    assert!(matches!(rl_derivative_left(&coarse, 1.5), Err(FracError::GridTooCoarse { .. })));
}

#[test]
fn derivative_power_rule_at_interior_nodes() {
    let grid = unit(2048);
    for alpha in [1.1, 1.5, 1.9] {
        let v = GridFunction::from_fn(grid, |t| t.powf(alpha)).unwrap();
        let d = rl_derivative_left(&v, alpha).unwrap();
        let target = gamma(alpha + 1.0);
        for i in interior(&grid) {
            assert_relative_eq!(d.values()[i], target, max_relative = 1e-3);
        }
        let kernel = GridFunction::from_fn(grid, |t| t.powf(alpha - 1.0)).unwrap();
        let d = rl_derivative_left(&kernel, alpha).unwrap();
        for i in interior(&grid) {
            assert!(d.values()[i].abs() <= 1e-2 * gamma(alpha));
        }
    }
    let d = rl_derivative_left(&GridFunction::zeros(grid), 1.5).unwrap();
    assert_eq!(d.extrapolated_node, 0);
}

#[test]
fn right_derivative_of_reflected_power() {
    // D_{T-}^{1/4} (T-t)^{1/4} = Γ(5/4)
    let grid = unit(4096);
    let v = GridFunction::from_fn(grid, |t| (1.0 - t).powf(0.25)).unwrap();
    let d = rl_derivative_right(&v, 0.25).unwrap();
    assert_eq!(d.extrapolated_node, 4096);
    for i in interior(&grid) {
        assert_relative_eq!(d.values()[i], 0.906_402_477_055_477_1, max_relative = 1e-3);
    }
}

#[test]
fn power_rule_examples() {
    let p = power_rule(0.0, 0.5, PowerMode::Integral).unwrap();
    assert_relative_eq!(p.coefficient, 1.0 / gamma(1.5), max_relative = 1e-15);
    assert_eq!(p.exponent, 0.5);
    let p = power_rule(1.5, 1.5, PowerMode::Derivative).unwrap();
    assert_relative_eq!(p.coefficient, gamma(2.5), max_relative = 1e-15);
    assert_eq!(p.exponent, 0.0);
    assert_eq!(power_rule(0.5, 1.5, PowerMode::Derivative).unwrap().coefficient, 0.0);
    assert!(power_rule(-1.5, 0.5, PowerMode::Integral).is_err());
}

#[test]
fn semigroup_and_adjoint_examples() {
    let grid = unit(1024);
    let one = GridFunction::constant(grid, 1.0).unwrap();
    assert!(check_semigroup(&one, 0.5, 0.5).unwrap() <= 1e-4);
    assert!(check_adjoint(&one, &one, 0.5).unwrap() <= 1e-4);
    // β + γ = 1 on a linear function: both sides are exact trapezoid integrals.
    let t = GridFunction::from_fn(grid, |t| 1.0 + t).unwrap();
    assert!(check_semigroup(&t, 0.25, 0.75).unwrap() <= 1e-3);
    let grid = unit(2048);
    let u = GridFunction::from_fn(grid, |t| t).unwrap();
    let v = GridFunction::from_fn(grid, |t| 1.0 - t).unwrap();
    assert!(check_adjoint(&u, &v, 0.3).unwrap() <= 1e-4);
}

#[test]
fn duality_examples() {
    let grid = unit(2048);
    let phi = GridFunction::from_fn(grid, |t| 16.0 * t * t * (1.0 - t) * (1.0 - t)).unwrap();
    let alpha = 1.5;
    // ⟨D^α t², φ⟩ = (2/Γ(3-α)) ∫ t^{2-α} φ, ⟨D^α t^α, φ⟩ = Γ(α+1) ∫ φ
    let cases = [(2.0, 0.833_665_416_382_254_6), (alpha, gamma(alpha + 1.0) * 16.0 / 30.0)];
    for (mu, lhs) in cases {
        let v = GridFunction::from_fn(grid, |t| t.powf(mu)).unwrap();
        let p = check_duality_blm(&v, &phi, alpha).unwrap();
        assert!(p.gap <= 1e-3 * lhs.abs());
        assert_relative_eq!(p.lhs, lhs, max_relative = 1e-3);
    }
    let one = GridFunction::constant(grid, 1.0).unwrap();
    assert!(matches!(check_duality_blm(&one, &phi, alpha), Err(FracError::PreconditionViolated(_))));
    let zero = GridFunction::zeros(grid);
    assert_eq!(check_duality_blm(&zero, &phi, alpha).unwrap().gap, 0.0);
}

#[test]
fn exchange_examples() {
    let grid = unit(2048);
    let alpha = 1.5;
    for mu in [alpha, alpha + 1.0] {
        let v = GridFunction::from_fn(grid, |t| t.powf(mu)).unwrap();
        assert!(check_exchange(&v, alpha).unwrap() <= 1e-3);
    }
}

#[test]
fn derivative_shift_on_power_family() {
    // D^α v = D^{α-1} v' for v(0) = 0
    let grid = unit(2048);
    let alpha = 1.5;
    for mu in [1.0, alpha, alpha + 1.0] {
        let v = GridFunction::from_fn(grid, |t| t.powf(mu)).unwrap();
        let dv = GridFunction::from_fn(grid, |t| if mu == 1.0 { 1.0 } else { mu * t.powf(mu - 1.0) }).unwrap();
        let lhs = rl_derivative_left(&v, alpha).unwrap();
        let rhs = rl_derivative_left(&dv, alpha - 1.0).unwrap();
        let exact = power_rule(mu, alpha, PowerMode::Derivative).unwrap();
        for i in (64..=grid.intervals() - 2).step_by(64) {
            let t = grid.node(i);
            let scale = exact.eval(t).abs().max(1.0);
            assert!((lhs.values()[i] - rhs.values()[i]).abs() <= 1e-3 * scale, "mu = {mu}, t = {t}");
        }
    }
}

#[test]
fn identity_tolerance_formula() {
    assert_eq!(identity_tolerance(2.0, 1.0 / 2048.0), 2e-3);
    assert_relative_eq!(identity_tolerance(1.0, 0.01), 1e-2, max_relative = 1e-12);
}
