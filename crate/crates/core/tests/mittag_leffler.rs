use approx::assert_relative_eq;
use fracwave_core::mittag_leffler::*;
use fracwave_core::special::gamma;
use fracwave_core::{FracError, GridFunction, TimeGrid};
use proptest::prelude::*;

const Z: [f64; 4] = [-0.5, -3.0, -12.0, -28.0];

// E_{α,β}(z) to 60 digits, columns follow Z.
const TABLE: [(f64, f64, [f64; 4]); 15] = [
    (1.1, 1.0, [0.6125308121724148, 0.0098590131600823995, -0.010048858134930509, -0.0036427249308090607]),
    (1.1, 2.0, [0.80167235281275678, 0.3253161367379656, 0.079433699456244555, 0.033655203397130316]),
    (1.1, 1.1, [0.67927584777277263, 0.059364427944116244, -0.0012970407010484382, -0.00015670669102081025]),
    (1.1, 2.1, [0.77493837565517039, 0.33004699561330587, 0.084170738177910876, 0.035844383033243181]),
    (1.1, 3.1, [0.39665529437448643, 0.2248946210873448, 0.076713858378646287, 0.034512314164388203]),
    (1.5, 1.0, [0.66323679487242796, -0.17556537379997824, -0.038863323267440968, -0.011668311653011931]),
    (1.5, 2.0, [0.85954405339801581, 0.39272963367217054, 0.032363733508080088, 0.021434578021142667]),
    (1.5, 1.5, [0.89886307554606876, 0.21497666776826928, -0.042314844901323301, 0.0029455508032964529]),
    (1.5, 2.5, [0.67352641025514409, 0.39185512459999275, 0.086571943605620081, 0.036131011130464712]),
    (1.5, 3.5, [0.28091189320396839, 0.20242345544260982, 0.080636355540993326, 0.034948765070673476]),
    (1.9, 1.0, [0.74009684574409438, -0.19800617221635832, -0.66880889389331765, 0.56216231882740268]),
    (1.9, 2.0, [0.90852355302759416, 0.52978112912036332, -0.085862739134462957, -0.061249539406201344]),
    (1.9, 1.9, [0.93663166533735539, 0.51354051677803679, -0.14076153260533182, -0.058016148077391626]),
    (1.9, 2.9, [0.51980630851181123, 0.39933539073878611, 0.13906740782444314, 0.015637060041878476]),
    (1.9, 3.9, [0.18295289394481168, 0.15673962362654556, 0.09048856159453858, 0.037901769264507191]),
];

fn close(value: f64, exact: f64, rel: f64) -> bool {
    (value - exact).abs() <= rel * exact.abs().max(1e-3)
}

#[test]
fn reference_table() {
    for (alpha, beta, row) in TABLE {
        let p = MlParams::new(alpha, beta).unwrap();
        for (z, exact) in Z.iter().zip(row) {
            let v = ml_eval(&p, *z).unwrap();
            assert!(close(v.value, exact, 1e-10), "E_{{{alpha},{beta}}}({z}) = {} vs {exact} via {:?}", v.value, v.branch);
            let o = ml_oracle(&p, *z).unwrap();
            assert!(close(o, exact, 1e-10), "oracle E_{{{alpha},{beta}}}({z}) = {o}");
        }
    }
}

#[test]
fn integral_branch_matches_table() {
    for (alpha, beta, row) in TABLE {
        let p = MlParams::new(alpha, beta).unwrap();
        for (z, exact) in Z.iter().zip(row) {
            let v = ml_integral(&p, *z).unwrap();
            assert!(close(v.value, exact, 1e-10), "E_{{{alpha},{beta}}}({z}) = {}", v.value);
        }
    }
}

#[test]
fn exponential_ladder() {
    let p = MlParams::new(1.0, 1.0).unwrap();
    for i in 0..=60 {
        let z = -5.0 + 0.1 * i as f64;
        assert_relative_eq!(ml_eval(&p, z).unwrap().value, z.exp(), max_relative = 1e-12);
    }
}

#[test]
fn classical_special_cases() {
    assert_relative_eq!(ml(2.0, 1.0, -1.0).unwrap(), 1f64.cos(), max_relative = 1e-12);
    assert_relative_eq!(ml(2.0, 2.0, -4.0).unwrap(), 2f64.sin() / 2.0, max_relative = 1e-12);
    assert_relative_eq!(ml(1.5, 2.5, 0.0).unwrap(), 1.0 / gamma(2.5), max_relative = 1e-15);
    assert_relative_eq!(ml(1.0, 1.0, 2.0).unwrap(), 2f64.exp(), max_relative = 1e-12);
}

#[test]
fn gamma_agrees_with_statrs() {
    for x in [0.3, 0.5, 1.25, 1.5, 2.5, 3.7, 7.1, 12.0] {
        assert_relative_eq!(gamma(x), statrs::function::gamma::gamma(x), max_relative = 1e-13);
    }
}

#[test]
fn integral_and_oracle_overlap() {
    for alpha in [1.1, 1.5, 1.9] {
        for beta in [1.0, alpha, 2.0] {
            let p = MlParams::new(alpha, beta).unwrap();
            for i in 0..=25 {
                let z = -30.0 + i as f64;
                let a = ml_integral(&p, z).unwrap().value;
                let b = ml_oracle(&p, z).unwrap();
                assert!(close(a, b, 1e-10), "E_{{{alpha},{beta}}}({z}): {a} vs {b}");
            }
        }
    }
}

#[test]
fn bounded_on_the_negative_axis() {
    for alpha in [1.1, 1.5, 1.9] {
        let p = MlParams::new(alpha, 1.0).unwrap();
        for i in 0..=2000 {
            let x = 1e4 * (i as f64 / 2000.0).powi(2);
            let v = ml_eval(&p, -x).unwrap();
            assert!(v.value.abs() <= 1.1, "E_{alpha},1(-{x}) = {}", v.value);
        }
    }
}

#[test]
fn kernel_integral_of_unit_forcing() {
    // λ∫₀^t s^{α-1}E_{α,α}(-λs^α) ds = 1 - E_{α,1}(-λt^α)
    let g = GridFunction::constant(TimeGrid::new(1.0, 1024).unwrap(), 1.0).unwrap();
    let k = ml_kernel_integral(1.5, 1.0, &g).unwrap();
    assert_relative_eq!(k.last(), 0.603_370_634_681_911_9, max_relative = 1e-6);
    assert_eq!(k.first(), 0.0);
}

#[test]
fn rejects_bad_arguments() {
    assert!(MlParams::new(0.0, 1.0).is_err());
    assert!(MlParams::new(2.5, 1.0).is_err());
    assert!(MlParams::new(1.5, -1.0).is_err());
    assert!(MlParams::with_tolerance(1.5, 1.0, 1e-3).is_err());
    let p = MlParams::new(1.5, 1.0).unwrap();
    assert!(ml_eval(&p, 6.0).is_err());
    assert!(ml_eval(&p, f64::NAN).is_err());
    assert!(matches!(ml_oracle(&p, -60.0), Err(FracError::OracleOutOfRange(_))));
    assert!(ml_integral(&p, 1.0).is_err());
    let near_one = MlParams::new(1.01, 1.0).unwrap();
    assert!(matches!(ml_oracle(&near_one, -49.0), Err(FracError::OracleCancellation(_))));
}

#[test]
fn integral_branch_near_unit_order() {
    // mpmath, 80 digits
    let cases = [
        (1.01, 0.3, -49.0, -0.0048437463574326425796),
        (1.01, 1.0, -49.0, -0.00021185894664152071311),
        (1.01, 1.0, -40.0, -0.00026221591376846638619),
        (1.04675, 1.2, -49.0, 0.0033985745642413888171),
    ];
    for (alpha, beta, z, exact) in cases {
        let v = ml_eval(&MlParams::new(alpha, beta).unwrap(), z).unwrap();
        assert!(close(v.value, exact, 1e-10), "E_{{{alpha},{beta}}}({z}) = {}", v.value);
    }
}

proptest! {
    #[test]
    fn dispatcher_agrees_with_oracle(alpha in 1.05f64..1.95, beta in 0.5f64..3.5, x in 0.0f64..45.0) {
        let p = MlParams::new(alpha, beta).unwrap();
        let v = ml_eval(&p, -x).unwrap();
        let o = ml_oracle(&p, -x);
        prop_assume!(o.is_ok());
        let o = o.unwrap();
        prop_assert!(close(v.value, o, 1e-9), "E_{{{},{}}}(-{}) = {} vs {}", alpha, beta, x, v.value, o);
    }

    #[test]
    fn recurrence_in_beta(alpha in 1.05f64..1.95, beta in 0.5f64..2.5, x in 0.1f64..40.0) {
        // E_{α,β}(z) = 1/Γ(β) + z E_{α,α+β}(z)
        let z = -x;
        let lhs = ml(alpha, beta, z).unwrap();
        let rhs = 1.0 / gamma(beta) + z * ml(alpha, alpha + beta, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + x));
    }
}
