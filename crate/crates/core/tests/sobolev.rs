use std::f64::consts::PI;

use approx::assert_relative_eq;
use fracwave_core::sobolev::*;
use fracwave_core::{FracError, GridFunction, TimeGrid};
use proptest::prelude::*;

fn sample(n: usize, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::from_fn(TimeGrid::new(1.0, n).unwrap(), f).unwrap()
}

fn norm2(v: &GridFunction, beta: f64) -> f64 {
    h_beta_norm_squared(v, NormOrder::new(beta).unwrap()).unwrap()
}

/// Name, function, β, L² part, seminorm².
type SlobodeckijCase = (&'static str, fn(f64) -> f64, f64, f64, f64);

#[test]
fn slobodeckij_reference_values() {
    // (L² part, seminorm²) on (0,1) by adaptive quadrature
    let cases: [SlobodeckijCase; 3] = [
        ("sin", |t| (PI * t).sin(), 0.25, 0.5, 1.145_462_162_627_349_6),
        ("t^2", |t| t * t, 0.75, 0.2, 3.276_190_476_190_473_6),
        ("exp", f64::exp, 0.5, 3.194_528_049_465_325_1, 2.992_044_922_645_284_6),
    ];
    for (name, f, sigma, l2, semi) in cases {
        let v = sample(1024, f);
        assert_relative_eq!(norm2(&v, sigma), l2 + semi, max_relative = 1e-3);
        let h = v.grid().step();
        assert_relative_eq!(slobodeckij_squared(v.values(), sigma, h), semi, max_relative = 1e-3);
        let _ = name;
    }
}

#[test]
fn linear_function_half_order() {
    let v = sample(512, |t| t);
    assert_relative_eq!(norm2(&v, 0.5), 4.0 / 3.0, max_relative = 2e-2);
}

#[test]
fn integer_orders() {
    let v = sample(1024, |t| (PI * t).sin());
    assert_relative_eq!(norm2(&v, 0.0), 0.5, max_relative = 1e-6);
    assert_relative_eq!(norm2(&v, 1.0), 0.5 + 0.5 * PI * PI, max_relative = 1e-4);
    assert_relative_eq!(norm2(&v, 2.0), 0.5 * (1.0 + PI.powi(2) + PI.powi(4)), max_relative = 1e-4);
}

#[test]
fn norms_grow_from_integer_orders() {
    // The Slobodeckij term blows up like 1/(1-σ), so only ‖·‖_{H^k} ≤ ‖·‖_{H^{k+σ}}
    // and ‖·‖_{H^k} ≤ ‖·‖_{H^{k+1}} hold without constants.
    let v = sample(512, |t| (3.0 * t).cos() + t * t);
    for k in 0..3 {
        let base = norm2(&v, k as f64);
        assert!(norm2(&v, k as f64 + 1.0) >= base);
        for sigma in [0.1, 0.5, 0.9] {
            assert!(norm2(&v, k as f64 + sigma) >= base);
        }
    }
}

#[test]
fn extended_orders_match_below_three() {
    let v = sample(256, |t| t.powi(3));
    assert_eq!(h_norm_squared_extended(&v, 2.5).unwrap(), norm2(&v, 2.5));
    assert!(h_norm_squared_extended(&v, 4.0).unwrap() >= norm2(&v, 3.0));
    assert!(matches!(h_norm_squared_extended(&v, 5.5), Err(FracError::UnsupportedNorm(_))));
    assert!(matches!(NormOrder::new(3.5), Err(FracError::UnsupportedNorm(_))));
    assert!(NormOrder::new(-0.1).is_err());
}

#[test]
fn power_family_diverges_above_its_regularity() {
    // t^{3/2} lies in H^β only for β < 2; at β = 3 the norm doubles per
    // halving of h.
    let norms: Vec<f64> = [256, 512, 1024, 2048].iter().map(|n| norm2(&sample(*n, |t| t.powf(1.5)), 3.0).sqrt()).collect();
    for w in norms.windows(2) {
        assert!(w[1] / w[0] >= 1.5, "{norms:?}");
    }
    let bounded: Vec<f64> = [256, 512, 1024, 2048].iter().map(|n| norm2(&sample(*n, |t| t.powf(1.5)), 1.5)).collect();
    assert!(bounded.windows(2).all(|w| w[1] / w[0] <= 1.25), "{bounded:?}");
}

#[test]
fn bochner_norm_of_orthogonal_modes() {
    let c = sample(256, |_| 1.0);
    let stack = CoeffStack::new(vec![c.clone(), c.clone()]).unwrap();
    assert_relative_eq!(bochner_norm(&stack, NormOrder::new(0.0).unwrap()).unwrap(), 2f64.sqrt(), max_relative = 1e-12);
    assert_eq!(stack.modes(), 2);
    assert!(CoeffStack::new(vec![]).is_err());
    let other = GridFunction::constant(TimeGrid::new(1.0, 128).unwrap(), 1.0).unwrap();
    assert!(matches!(CoeffStack::new(vec![c, other]), Err(FracError::IncompatibleGrids)));
}

#[test]
fn bochner_norm_grows_with_truncation() {
    let modes: Vec<GridFunction> = (1..=6).map(|k| sample(256, move |t| (k as f64 * t).sin() / k as f64)).collect();
    let order = NormOrder::new(1.5).unwrap();
    let mut previous = 0.0;
    for k in 1..=modes.len() {
        let norm = bochner_norm(&CoeffStack::new(modes[..k].to_vec()).unwrap(), order).unwrap();
        assert!(norm > previous);
        previous = norm;
    }
}

#[test]
fn equivalence_ratios_are_positive_and_bounded() {
    let family: [fn(f64) -> f64; 5] = [|_| 1.0, |t| t, |t| (PI * t).sin(), f64::exp, |t| 1.0 / (1.0 + t)];
    for alpha in [1.2, 1.5, 1.8] {
        for f in family {
            let r = equivalence_ratio(&sample(1024, f), alpha).unwrap();
            for ratio in [r.left_ratio, r.right_ratio, r.inner_ratio] {
                assert!(ratio > 0.0 && ratio < 10.0, "alpha {alpha}: {r:?}");
            }
            assert!(r.inner <= (r.left_squared * r.right_squared).sqrt() * (1.0 + 1e-9));
        }
    }
}

#[test]
fn equivalence_rejects_degenerate_input() {
    let zero = GridFunction::zeros(TimeGrid::new(1.0, 64).unwrap());
    assert!(matches!(equivalence_ratio(&zero, 1.5), Err(FracError::UndefinedRatio)));
    assert!(equivalence_ratio(&sample(64, |t| t), 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norms_are_homogeneous(c in -5.0f64..5.0, beta in 0.0f64..3.0, k in 1.0f64..4.0) {
        let v = sample(128, |t| (k * t).sin() + t);
        let scaled = v.scaled(c);
        let (a, b) = (h_beta_norm(&scaled, NormOrder::new(beta).unwrap()).unwrap(), h_beta_norm(&v, NormOrder::new(beta).unwrap()).unwrap());
        prop_assert!((a - c.abs() * b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn triangle_inequality(beta in 0.0f64..3.0, k in 1.0f64..4.0, m in 1.0f64..4.0) {
        let u = sample(128, |t| (k * t).cos());
        let v = sample(128, |t| t.powf(m));
        let order = NormOrder::new(beta).unwrap();
        let sum = h_beta_norm(&u.add(&v).unwrap(), order).unwrap();
        prop_assert!(sum <= h_beta_norm(&u, order).unwrap() + h_beta_norm(&v, order).unwrap() + 1e-12);
    }

    #[test]
    fn equivalence_is_scale_invariant(c in 0.1f64..10.0, alpha in 1.1f64..1.9) {
        let v = sample(256, |t| 1.0 + t * t);
        let a = equivalence_ratio(&v, alpha).unwrap();
        let b = equivalence_ratio(&v.scaled(c), alpha).unwrap();
        prop_assert!((a.left_ratio - b.left_ratio).abs() <= 1e-10 * a.left_ratio);
        prop_assert!((a.inner_ratio - b.inner_ratio).abs() <= 1e-10 * a.inner_ratio.abs());
    }
}
