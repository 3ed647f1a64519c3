use apoint_equidist::zeta::{eval_jet, eval_zeta_derivative, ComplexPoint};
use num_complex::Complex64;
use proptest::prelude::*;

fn pt(re: f64, im: f64) -> ComplexPoint {
    ComplexPoint::new(re, im).unwrap()
}

/// (σ, t, k, Re, Im) computed with mpmath at 30 digits.
const REFERENCE: [(f64, f64, u32, f64, f64); 8] = [
    (0.5, 14.134725141734693, 0, 1.166748873893282e-16, -7.32888188372844e-16),
    (0.5, 100.0, 1, -3.7273127096446483, -0.19422870257374322),
    (-2.0, 37.0, 2, -219.25211188783078, -166.7911618102846),
    (3.0, -250.0, 3, 0.02565502517878107, 0.009400337363842397),
    (0.75, 1999.5, 0, 0.4665376199716451, -0.09022292684481528),
    (0.75, 1999.5, 4, -159.39121671782067, 38.05954612243443),
    (-2.0, 2000.0, 0, 1631728.9002866836, -108211.27808571316),
    (6.0, 1500.0, 1, 0.010632565461951779, 0.0030312084912725136),
];

#[test]
fn matches_reference_values_within_reported_bound() {
    for (re, im, k, vr, vi) in REFERENCE {
        let r = eval_zeta_derivative(pt(re, im), k, 1e-12).unwrap();
        let exact = Complex64::new(vr, vi);
        let err = (r.value - exact).norm();
        // reference itself is rounded to double
        let slack = 2.0 * f64::EPSILON * exact.norm();
        assert!(
            err <= r.abs_error_bound + slack,
            "s={re}+{im}i k={k}: err {err:e} > bound {:e}",
            r.abs_error_bound
        );
        assert!(r.abs_error_bound <= 1e-12 * exact.norm().max(1.0));
    }
}

#[test]
fn tighter_target_never_loosens_bound() {
    for (re, im) in [(0.5, 30.0), (-1.5, 400.0), (2.0, 5.0), (0.9, 1200.0)] {
        for k in 0..=4 {
            let mut previous = f64::INFINITY;
            for target in [1e-4, 1e-6, 1e-8, 1e-10, 1e-12] {
                let r = eval_zeta_derivative(pt(re, im), k, target).unwrap();
                assert!(r.abs_error_bound <= previous * (1.0 + 1e-12) || r.abs_error_bound <= target);
                previous = r.abs_error_bound;
            }
        }
    }
}

#[test]
fn central_differences_converge_at_second_order() {
    for (re, im) in [(0.5, 21.0), (1.7, 60.0), (-1.0, 8.0), (0.6, 700.0)] {
        for k in 0..4u32 {
            let exact = eval_zeta_derivative(pt(re, im), k + 1, 1e-11).unwrap().value;
            let hs = [0.08, 0.04, 0.02, 0.01];
            let errs: Vec<f64> = hs
                .iter()
                .map(|&h| {
                    let plus = eval_zeta_derivative(pt(re + h, im), k, 1e-11).unwrap().value;
                    let minus = eval_zeta_derivative(pt(re - h, im), k, 1e-11).unwrap().value;
                    ((plus - minus) / (2.0 * h) - exact).norm()
                })
                .collect();
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.8, "s={re}+{im}i k={k}: observed order {order} from {errs:?}");
            }
        }
    }
}

#[test]
fn jet_orders_agree_with_single_order_calls() {
    let s = pt(0.3, 77.7);
    let jet = eval_jet(s, 4, 1e-12).unwrap();
    for k in 0..=4u32 {
        let single = eval_zeta_derivative(s, k, 1e-12).unwrap();
        assert!((jet[k as usize].value - single.value).norm() <= jet[k as usize].abs_error_bound + single.abs_error_bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugate_symmetry(re in -2.0f64..6.0, im in 0.5f64..1500.0, k in 0u32..=4) {
        let up = eval_zeta_derivative(pt(re, im), k, 1e-10).unwrap();
        let down = eval_zeta_derivative(pt(re, -im), k, 1e-10).unwrap();
        prop_assert!((down.value - up.value.conj()).norm() <= 2.0 * up.abs_error_bound.max(down.abs_error_bound));
    }

    #[test]
    fn bound_is_positive_and_within_target(re in -2.0f64..6.0, im in 1.0f64..2000.0, k in 0u32..=4) {
        let r = eval_zeta_derivative(pt(re, im), k, 1e-11).unwrap();
        prop_assert!(r.abs_error_bound > 0.0);
        prop_assert!(r.abs_error_bound <= 1e-11 * r.value.norm().max(1.0));
        prop_assert!(r.terms_used >= 1);
    }
}
