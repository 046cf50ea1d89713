use fracwave_harness::lcg::Lcg;
use fracwave_harness::report::{from_json, to_csv, to_json};
use fracwave_harness::{CheckReport, ExperimentConfig, ExperimentKind, HarnessError, Level};
use proptest::prelude::*;

#[test]
fn lcg_reference_sequence() {
    let mut g = Lcg::new(0);
    assert_eq!(g.next_u64(), 1_442_695_040_888_963_407);
    assert_eq!(g.next_u64(), 1_876_011_003_808_476_466);
}

#[test]
fn empty_reports() {
    assert_eq!(to_json(&[]).unwrap(), "[]\n");
    let csv = to_csv(&[]).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("anchor,check,suite,case,metric,status"));
}

#[test]
fn non_finite_values_are_rejected() {
    let r = CheckReport::new("eq:ode", "mode-residual", "ode-regularity", "zero", "x").levels(vec![Level::new(8, f64::NAN)]);
    assert!(matches!(to_json(std::slice::from_ref(&r)), Err(HarnessError::Serialize(_))));
    assert!(to_csv(&[r]).is_err());
}

fn report_strategy() -> impl Strategy<Value = CheckReport> {
    (
        "[a-z]{1,6}:[a-z-]{1,8}",
        prop::collection::vec((8usize..4096, -1e6f64..1e6, prop::option::of(0.0f64..1e3)), 0..5),
        any::<bool>(),
        prop::option::of(-1e3f64..1e3),
    )
        .prop_map(|(anchor, levels, pass, observed)| {
            let levels = levels
                .into_iter()
                .map(|(n, v, l)| {
                    let level = Level::new(n, v).with_sides(v * 0.5, v.abs() + 1.0);
                    match l {
                        Some(l) => level.with_lambda(l),
                        None => level,
                    }
                })
                .collect();
            let mut r = CheckReport::new(&anchor, "check", "suite", "case", "metric").tolerance(1e-3).levels(levels).status(pass);
            r.observed = observed;
            r
        })
}

proptest! {
    #[test]
    fn lcg_stays_in_unit_interval(seed in any::<u64>()) {
        let mut g = Lcg::new(seed);
        let mut h = Lcg::new(seed);
        for _ in 0..64 {
            let x = g.next_f64();
            prop_assert!((0.0..1.0).contains(&x));
            prop_assert_eq!(x, h.next_f64());
        }
        let u = g.uniform(-2.0, 3.0);
        prop_assert!((-2.0..3.0).contains(&u));
    }

    #[test]
    fn json_round_trips_exactly(reports in prop::collection::vec(report_strategy(), 0..6)) {
        let text = to_json(&reports).unwrap();
        prop_assert_eq!(from_json(&text).unwrap(), reports.clone());
        let levels: usize = reports.iter().map(|r| r.levels.len()).sum();
        prop_assert_eq!(to_csv(&reports).unwrap().lines().count(), levels + 1);
    }

    #[test]
    fn ladder_validation(base in 8usize..64, steps in 1usize..4, alpha in 0.5f64..2.5, bump in 0usize..3) {
        let mut ladder: Vec<usize> = (0..steps).map(|j| base << j).collect();
        if bump > 0 && steps > 1 {
            *ladder.last_mut().unwrap() += bump;
        }
        let text = format!("alpha = {alpha}\n[grid]\nladder = {ladder:?}\n");
        let mut cfg = ExperimentConfig::from_toml_str(&text, "prop").unwrap();
        let ok = cfg.validate(ExperimentKind::Lemmas).is_ok();
        let expected = alpha > 1.0 && alpha < 2.0 && !(bump > 0 && steps > 1);
        prop_assert_eq!(ok, expected);
    }
}
