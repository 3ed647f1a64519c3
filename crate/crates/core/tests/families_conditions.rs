use apoint_equidist::conditions::{
    check_conditions, check_conditions_with, classify_power_log, ConditionId, PowerLogClass, Verdict,
};
use apoint_equidist::families::{FamilyKind, FunctionFamily};
use proptest::prelude::*;

/// Lower end used for grid agreement; the smallest c clearing every
/// admissible cell's low-t transients in C2 and C3 is about 1.3e3.
const GRID_C: f64 = 2000.0;
const GRID_T: f64 = 1e6;

fn grid_values() -> Vec<f64> {
    (0..9).map(|i| -2.0 + 0.5 * i as f64).collect()
}

fn fd_order(family: &FunctionFamily, t: f64, order: u8) -> f64 {
    // error of the central difference of the (order-1)-th derivative at h and h/2
    let exact = family.eval_f(t, order).unwrap();
    let err = |h: f64| {
        let plus = family.eval_f(t + h, order - 1).unwrap();
        let minus = family.eval_f(t - h, order - 1).unwrap();
        ((plus - minus) / (2.0 * h) - exact).abs()
    };
    let h = 0.05 * t;
    (err(h) / err(h / 2.0)).log2()
}

#[test]
fn derivatives_match_finite_differences() {
    let families = [
        FunctionFamily::power_log(2.0, 0.5, 1.0).unwrap(),
        FunctionFamily::power_log(-1.0, 1.0, -1.5).unwrap(),
        FunctionFamily::log_pow_log_log(1.0, 2.0, 0.5).unwrap(),
        FunctionFamily::power_times_zeta(1.5, 0.5).unwrap(),
        FunctionFamily::linear(3.0).unwrap(),
    ];
    for f in &families {
        if matches!(f.kind(), FamilyKind::LinearPhase { .. }) {
            // polynomial of degree one: differences are exact
            continue;
        }
        for order in [1u8, 2] {
            let p = fd_order(f, 8.0, order);
            assert!(p >= 1.8, "{f} order {order}: observed convergence {p}");
        }
    }
    let f = FunctionFamily::power_log(2.0, 0.5, 1.0).unwrap();
    let h = 1e-3;
    let fd = (f.eval_f(100.0 + h, 1).unwrap() - f.eval_f(100.0 - h, 1).unwrap()) / (2.0 * h);
    let exact = f.eval_f(100.0, 2).unwrap();
    assert!((fd - exact).abs() <= 1e-6 * exact.abs());
}

#[test]
fn sqrt_family_satisfies_everything() {
    let f = FunctionFamily::power_log(1.0, 0.5, 0.0).unwrap();
    let report = check_conditions(&f, 100.0, 1e5, 400).unwrap();
    assert!(report.all_hold(), "{report:?}");
    assert_eq!(report.witness, None);
}

#[test]
fn square_family_fails_integral_condition() {
    let f = FunctionFamily::power_log(1.0, 2.0, 0.0).unwrap();
    let report = check_conditions(&f, 100.0, 1e5, 400).unwrap();
    assert_eq!(report.verdict(ConditionId::C6), Verdict::Fails);
    assert!(report.witness.is_some());
}

#[test]
fn log_square_family_satisfies_everything() {
    let f = FunctionFamily::log_pow_log_log(1.0, 2.0, 0.0).unwrap();
    let report = check_conditions(&f, 100.0, 1e6, 400).unwrap();
    assert!(report.all_hold(), "{report:?}");
}

#[test]
fn zeta_weighted_family_satisfies_everything() {
    let f = FunctionFamily::power_times_zeta(1.0, 0.5).unwrap();
    let report = check_conditions(&f, 100.0, 1e5, 200).unwrap();
    assert!(report.all_hold(), "{report:?}");
}

#[test]
fn linear_phase_violates_second_derivative_condition() {
    let f = FunctionFamily::linear(1.0).unwrap();
    let report = check_conditions(&f, 100.0, 1e5, 200).unwrap();
    assert_eq!(report.verdict(ConditionId::C3), Verdict::Fails);
    assert_eq!(report.verdict(ConditionId::C5), Verdict::Holds);
}

#[test]
fn classifier_agrees_with_numeric_checks_on_grid() {
    for v in grid_values() {
        for w in grid_values() {
            let class = classify_power_log(1.0, v, w).unwrap();
            if class == PowerLogClass::Borderline {
                continue;
            }
            let f = FunctionFamily::power_log(1.0, v, w).unwrap();
            let report = check_conditions(&f, GRID_C, GRID_T, 200).unwrap();
            match class {
                PowerLogClass::Admissible => assert!(report.all_hold(), "v={v} w={w}: {report:?}"),
                _ => {
                    let fails = [ConditionId::C4, ConditionId::C5, ConditionId::C6]
                        .iter()
                        .any(|id| report.verdict(*id) == Verdict::Fails);
                    assert!(fails, "v={v} w={w}: {report:?}");
                }
            }
        }
    }
}

#[test]
fn transient_cells_need_larger_c() {
    // t f'^2 turns over near t = 403 for (v, w) = (0.5, -2)
    let f = FunctionFamily::power_log(1.0, 0.5, -2.0).unwrap();
    let report = check_conditions(&f, 100.0, 1e5, 400).unwrap();
    assert_eq!(report.verdict(ConditionId::C2), Verdict::Fails);
    let w = report.witness.unwrap();
    assert!((300.0..500.0).contains(&w), "{w}");
    // the second-derivative ratio for (0.5, 1) settles later for n = 2 than n = 1
    let f = FunctionFamily::power_log(1.0, 0.5, 1.0).unwrap();
    assert_eq!(check_conditions_with(&f, 2000.0, 1e5, 400, 1).unwrap().verdict(ConditionId::C3), Verdict::Holds);
    assert_eq!(check_conditions_with(&f, 2000.0, 1e5, 400, 2).unwrap().verdict(ConditionId::C3), Verdict::Fails);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn admissible_families_have_single_signed_c2_sample(v in 0.05f64..0.95, w in -2.0f64..2.0, u in prop::sample::select(vec![-2.0, -0.5, 0.5, 3.0])) {
        let f = FunctionFamily::power_log(u, v, w).unwrap();
        for i in 0..200 {
            let t = 100.0 * 1e3f64.powf(i as f64 / 199.0);
            let d = f.eval_f(t, 1).unwrap();
            prop_assert!(t * d * d > 0.0);
        }
    }

    #[test]
    fn log_family_has_single_signed_c2_sample(v in 1.0f64..3.0, w in 0.01f64..2.0) {
        let f = FunctionFamily::log_pow_log_log(1.0, v, w).unwrap();
        for i in 0..200 {
            let t = 100.0 * 1e3f64.powf(i as f64 / 199.0);
            let d = f.eval_f(t, 1).unwrap();
            prop_assert!(t * d * d > 0.0);
        }
    }
}
