use approx::assert_relative_eq;
use fracwave_core::mittag_leffler::{ml_oracle, MlParams};
use fracwave_core::mode_solver::*;
use fracwave_core::special::gamma;
use fracwave_core::{FracError, GridFunction, TimeGrid};
use proptest::prelude::*;

const METHODS: [SolveMethod; 2] = [SolveMethod::ClosedForm, SolveMethod::Volterra];

fn grid(n: usize) -> TimeGrid {
    TimeGrid::new(1.0, n).unwrap()
}

fn max_gap(a: &GridFunction, b: impl Fn(f64) -> f64) -> f64 {
    a.grid().nodes().zip(a.values()).map(|(t, v)| (v - b(t)).abs()).fold(0.0, f64::max)
}

#[test]
fn constant_without_stiffness() {
    let g = GridFunction::zeros(grid(256));
    let p = ModeProblem::new(1.5, 0.0, 1.0, 0.0, g).unwrap();
    for m in METHODS {
        let sol = solve(&p, m).unwrap();
        assert!(max_gap(&sol.y, |_| 1.0) <= 1e-12, "{m:?}");
    }
}

#[test]
fn steady_state_is_preserved() {
    let g = GridFunction::constant(grid(256), 2.0).unwrap();
    let p = ModeProblem::new(1.5, 2.0, 1.0, 0.0, g).unwrap().with_g0(2.0).with_g1(0.0);
    for m in METHODS {
        let sol = solve(&p, m).unwrap();
        assert!(max_gap(&sol.y, |_| 1.0) <= 1e-10, "{m:?}");
        assert!(sol.s1.max_abs() == 0.0 && sol.s3.max_abs() == 0.0);
    }
}

#[test]
fn relaxation_matches_oracle() {
    for alpha in [1.2, 1.5, 1.8] {
        let g = GridFunction::zeros(grid(1024));
        let p = ModeProblem::new(alpha, 1.0, 1.0, 0.0, g).unwrap().with_g0(0.0).with_g1(0.0);
        let params = MlParams::new(alpha, 1.0).unwrap();
        let exact = |t: f64| ml_oracle(&params, -t.powf(alpha)).unwrap();
        assert!(max_gap(&solve_closed_form(&p).unwrap().y, exact) <= 1e-10);
        assert!(max_gap(&solve_volterra(&p).unwrap().y, exact) <= 1e-4);
        assert!(max_gap(&solve_with_subtraction(&p, SolveMethod::Volterra).unwrap().y, exact) <= 1e-5);
    }
}

#[test]
fn volterra_reproduces_power_solution() {
    // D^α t^α = Γ(α+1) with λ = 0
    let alpha = 1.5;
    let g = GridFunction::constant(grid(512), gamma(alpha + 1.0)).unwrap();
    let p = ModeProblem::new(alpha, 0.0, 0.0, 0.0, g).unwrap();
    let sol = solve_volterra(&p).unwrap();
    assert!(max_gap(&sol.y, |t| t.powf(alpha)) <= 1e-10);
}

#[test]
fn singular_parts_examples() {
    let g = GridFunction::constant(grid(64), 1.0).unwrap();
    let p = ModeProblem::new(1.5, 0.0, 0.0, 0.0, g).unwrap().with_g0(1.0).with_g1(0.0);
    let parts = singular_parts(&p).unwrap();
    assert_relative_eq!(parts.s1.last(), 0.752_252_778_063_675, max_relative = 1e-12);
    assert_eq!(parts.s2.max_abs(), 0.0);
    assert_eq!(parts.s3.max_abs(), 0.0);
    assert!(!parts.g0_estimated);

    let g = GridFunction::constant(grid(64), 3.0).unwrap();
    let p = ModeProblem::new(1.5, 3.0, 1.0, 0.0, g).unwrap().with_g0(3.0).with_g1(0.0);
    let parts = singular_parts(&p).unwrap();
    assert_eq!(parts.s1.max_abs(), 0.0);
    assert_eq!(parts.s3.max_abs(), 0.0);
}

#[test]
fn zero_data_gives_zero() {
    let p = ModeProblem::new(1.5, 4.0, 0.0, 0.0, GridFunction::zeros(grid(128))).unwrap();
    for m in METHODS {
        let sol = solve(&p, m).unwrap();
        assert_eq!(sol.y.max_abs(), 0.0);
        assert_eq!(sol.residual.norm, 0.0);
    }
    let sol = solve_closed_form(&p).unwrap();
    for e in verify_ode_estimates(&p, &sol).unwrap() {
        assert_eq!(e.ratio, 0.0, "{}", e.id);
    }
}

#[test]
fn methods_agree_on_smooth_forcing() {
    let g = GridFunction::from_fn(grid(1024), |t| t.cos()).unwrap();
    let p = ModeProblem::new(1.7, 10.0, 1.0, 1.0, g).unwrap().with_g0(1.0).with_g1(0.0);
    let a = solve_closed_form(&p).unwrap();
    let b = solve_volterra(&p).unwrap();
    assert!(a.y.sub(&b.y).unwrap().max_abs() <= 1e-4 * a.y.max_abs());
    assert!(a.residual.relative() <= 1e-2);
}

#[test]
fn missing_forcing_start_values() {
    let g = GridFunction::from_fn(grid(64), |t| 1.0 + t).unwrap();
    let p = ModeProblem::new(1.5, 1.0, 0.0, 0.0, g.clone()).unwrap().estimate_missing(false);
    assert!(matches!(singular_parts(&p), Err(FracError::IncompleteData(_))));
    let p = ModeProblem::new(1.5, 1.0, 0.0, 0.0, g).unwrap();
    let parts = singular_parts(&p).unwrap();
    assert!(parts.g0_estimated && parts.g1_estimated);
    assert_relative_eq!(p.g0().unwrap().0, 1.0, max_relative = 1e-10);
}

#[test]
fn invalid_problems_are_rejected() {
    let g = GridFunction::zeros(grid(64));
    assert!(ModeProblem::new(1.0, 1.0, 0.0, 0.0, g.clone()).is_err());
    assert!(ModeProblem::new(1.5, -1.0, 0.0, 0.0, g.clone()).is_err());
    assert!(ModeProblem::new(1.5, 1.0, f64::NAN, 0.0, g).is_err());
    assert!(ModeProblem::new(1.5, 1.0, 0.0, 0.0, GridFunction::zeros(grid(2))).is_err());
}

#[test]
fn estimates_are_reported_per_order() {
    let g = GridFunction::constant(grid(512), 1.0).unwrap();
    for (alpha, skipped) in [(1.3, true), (1.7, false)] {
        let p = ModeProblem::new(alpha, 1.0, 0.0, 0.0, g.clone()).unwrap().with_g0(1.0).with_g1(0.0);
        let sol = solve_closed_form(&p).unwrap();
        let entries = verify_ode_estimates(&p, &sol).unwrap();
        let ids: Vec<_> = entries.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["eq:ode-1", "eq:ode-2-1", "eq:ode-2-2", "rem:ode"]);
        assert_eq!(entries[2].skipped.is_some(), skipped);
        assert!(entries.iter().all(|e| e.ratio.is_finite() && e.ratio >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solution_is_linear_in_data(a in -2.0f64..2.0, c0 in -1.0f64..1.0, c1 in -1.0f64..1.0, lambda in 0.0f64..20.0) {
        let g = GridFunction::from_fn(grid(128), |t| (2.0 * t).sin()).unwrap();
        let p1 = ModeProblem::new(1.6, lambda, c0, c1, g.clone()).unwrap();
        let p2 = ModeProblem::new(1.6, lambda, a * c0, a * c1, g.scaled(a)).unwrap();
        for m in METHODS {
            let y1 = solve(&p1, m).unwrap().y.scaled(a);
            let y2 = solve(&p2, m).unwrap().y;
            prop_assert!(y1.sub(&y2).unwrap().max_abs() <= 1e-12 * (1.0 + y1.max_abs()));
        }
    }

    #[test]
    fn subtraction_converges_to_the_exact_solution(lambda in 0.0f64..20.0, alpha in 1.1f64..1.9) {
        // The closed form is exact for affine forcing, so the gap is the
        // quadrature error of the subtracted path and must fall like h².
        let gap = |n: usize| {
            let g = GridFunction::from_fn(grid(n), |t| 1.0 + t).unwrap();
            let p = ModeProblem::new(alpha, lambda, 0.5, 0.0, g).unwrap().with_g0(1.0).with_g1(1.0);
            let plain = solve_closed_form(&p).unwrap().y;
            let split = solve_with_subtraction(&p, SolveMethod::ClosedForm).unwrap().y;
            plain.sub(&split).unwrap().max_abs()
        };
        let (coarse, fine) = (gap(256), gap(512));
        prop_assert!(coarse <= 1e-2);
        prop_assert!(fine <= coarse / 3.0 || fine <= 1e-12, "{} -> {}", coarse, fine);
    }
}
