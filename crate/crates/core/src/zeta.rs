//! ζ^(k)(s) by Euler–Maclaurin summation with a reported error bound.
//!
//! All derivative orders are computed together as a truncated Taylor expansion
//! ("jet") in the variable s: the Dirichlet terms contribute
//! `n^{-s} (-ln n)^j / j!`, and the tail corrections are propagated through
//! jet products and quotients. The Dirichlet phases `t ln n` are reduced
//! modulo 2π in double-double and the partial sums are accumulated in
//! double-double, so only the per-term values carry double rounding.
//!
//! The truncation remainder of ζ itself is bounded by
//! `|B_2M|/(2M)! |s(s+1)…(s+2M-1)| N^{1-σ-2M}/(σ+2M-1)`; bounds for
//! derivatives come from the Cauchy estimate on a small circle around s.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::dd::{ComplexAccumulator, DoubleDouble};
use crate::target::{TargetSpec, MAX_K};

/// Radius around s = 1 inside which evaluation is refused.
pub const POLE_GUARD_RADIUS: f64 = 1e-3;
/// Smallest accepted `target_accuracy`.
pub const MIN_TARGET_ACCURACY: f64 = 1e-14;
/// Internal cap on jet length; one above [`MAX_K`] so callers can get ζ^(k+1).
pub const MAX_JET_ORDER: usize = MAX_K as usize + 1;

const MAX_BERNOULLI_TERMS: usize = 80;
const MAX_DIRICHLET_TERMS: u64 = 4_000_000;
const LN_TABLE_SIZE: usize = 1 << 14;
const EPS: f64 = f64::EPSILON * 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZetaError {
    #[error("s = {re}+{im}i lies within {POLE_GUARD_RADIUS} of the pole at s = 1")]
    PoleProximity { re: f64, im: f64 },
    #[error("accuracy {target:e} not reached (best bound {achieved:e})")]
    AccuracyNotReached { target: f64, achieved: f64 },
    #[error("target accuracy {0:e} is below the supported minimum {MIN_TARGET_ACCURACY:e}")]
    InvalidAccuracy(f64),
    #[error("derivative order {0} exceeds the supported maximum")]
    OrderTooLarge(usize),
    #[error("non-finite evaluation point")]
    NonFinite,
}

/// A point of the complex plane with finite coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexPoint {
    re: f64,
    im: f64,
}

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Result<Self, ZetaError> {
        if re.is_finite() && im.is_finite() {
            Ok(ComplexPoint { re, im })
        } else {
            Err(ZetaError::NonFinite)
        }
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn conj(&self) -> Self {
        ComplexPoint { re: self.re, im: -self.im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl TryFrom<Complex64> for ComplexPoint {
    type Error = ZetaError;
    fn try_from(z: Complex64) -> Result<Self, ZetaError> {
        ComplexPoint::new(z.re, z.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    /// Bound on `|value - exact|`: truncation remainder plus rounding.
    pub abs_error_bound: f64,
    /// Dirichlet terms summed plus Bernoulli corrections applied.
    pub terms_used: usize,
}

/// ζ^(k)(s).
///
/// The returned bound satisfies `abs_error_bound <= target_accuracy * max(1, |value|)`;
/// the relative scaling only matters where |ζ^(k)| exceeds one (left of the
/// critical strip), where an absolute target below the double-precision
/// spacing of the value cannot be honoured.
pub fn eval_zeta_derivative(s: ComplexPoint, k: u32, target_accuracy: f64) -> Result<EvalResult, ZetaError> {
    if k > MAX_K {
        return Err(ZetaError::OrderTooLarge(k as usize));
    }
    let jet = eval_jet(s, k as usize, target_accuracy)?;
    Ok(jet[k as usize])
}

/// ζ^(k)(s) − a for the target equation; the error bound is unchanged.
pub fn eval_shifted(s: ComplexPoint, target: &TargetSpec, target_accuracy: f64) -> Result<EvalResult, ZetaError> {
    let r = eval_zeta_derivative(s, target.k(), target_accuracy)?;
    Ok(EvalResult { value: r.value - target.a(), ..r })
}

/// ζ^(j)(s) for every `j <= max_order`, each with its own bound.
pub fn eval_jet(s: ComplexPoint, max_order: usize, target_accuracy: f64) -> Result<Vec<EvalResult>, ZetaError> {
    if max_order > MAX_JET_ORDER {
        return Err(ZetaError::OrderTooLarge(max_order));
    }
    if !(target_accuracy >= MIN_TARGET_ACCURACY) || !target_accuracy.is_finite() {
        return Err(ZetaError::InvalidAccuracy(target_accuracy));
    }
    let z = s.to_complex();
    if (z - 1.0).norm() < POLE_GUARD_RADIUS {
        return Err(ZetaError::PoleProximity { re: s.re, im: s.im });
    }

    let plan = plan_truncation(z, max_order, 0.25 * target_accuracy).ok_or(ZetaError::AccuracyNotReached {
        target: target_accuracy,
        achieved: f64::INFINITY,
    })?;
    let len = max_order + 1;
    let (coeffs, budget) = euler_maclaurin_jet(z, plan.n, plan.m, len);

    let mut factorial = 1.0;
    let mut out = Vec::with_capacity(len);
    for j in 0..len {
        if j > 0 {
            factorial *= j as f64;
        }
        let value = coeffs[j] * factorial;
        let rounding = factorial * EPS * budget[j] + 2.0 * EPS * value.norm();
        let bound = plan.truncation[j] + rounding;
        let bound = bound.max(f64::MIN_POSITIVE);
        let allowed = target_accuracy * value.norm().max(1.0);
        if !value.re.is_finite() || !value.im.is_finite() || bound > allowed {
            return Err(ZetaError::AccuracyNotReached { target: target_accuracy, achieved: bound });
        }
        out.push(EvalResult {
            value,
            abs_error_bound: bound,
            terms_used: (plan.n as usize - 1) + plan.m,
        });
    }
    Ok(out)
}

struct Plan {
    n: u64,
    m: usize,
    truncation: Vec<f64>,
}

const CAUCHY_RADII: [f64; 3] = [0.1, 0.3, 0.8];

/// Smallest Dirichlet length N (then smallest Bernoulli count M) whose
/// remainder bound for every order up to `max_order` is below `goal`.
fn plan_truncation(s: Complex64, max_order: usize, goal: f64) -> Option<Plan> {
    let ln_goal = goal.ln();
    let abs_s = s.norm();
    let mut n = ((0.9 * abs_s / (2.0 * PI)).floor() as u64).max(2);
    while n <= MAX_DIRICHLET_TERMS {
        if let Some(m) = smallest_m(s, abs_s, n, max_order, ln_goal) {
            let truncation = (0..=max_order).map(|j| log_remainder_bound(s, n, m, j).exp()).collect();
            return Some(Plan { n, m, truncation });
        }
        n = (n as f64 * 1.15).ceil() as u64 + 1;
    }
    None
}

/// Walks M upward for a fixed N and stops once the bound for the worst
/// order turns up again (the remainder series is only asymptotic).
fn smallest_m(s: Complex64, abs_s: f64, n: u64, max_order: usize, ln_goal: f64) -> Option<usize> {
    let mut previous = f64::INFINITY;
    for m in 1..=MAX_BERNOULLI_TERMS {
        let worst = log_remainder_bound_fast(s, abs_s, n, m, 0).max(log_remainder_bound_fast(s, abs_s, n, m, max_order));
        if worst <= ln_goal {
            return Some(m);
        }
        if worst.is_finite() && worst > previous && m > 2 {
            return None;
        }
        previous = worst;
    }
    None
}

/// Same bound as [`log_remainder_bound`] with the Pochhammer log-sum taken
/// from log-gamma differences.
fn log_remainder_bound_fast(s: Complex64, abs_s: f64, n: u64, m: usize, order: usize) -> f64 {
    let radii: &[f64] = if order == 0 { &[0.0] } else { &CAUCHY_RADII };
    let ln_n = (n as f64).ln();
    let mf = m as f64;
    let common = (2.0 * PI * PI / 6.0).ln() - 2.0 * mf * (2.0 * PI).ln();
    let mut best = f64::INFINITY;
    for &r in radii {
        let denom = s.re - r + 2.0 * mf - 1.0;
        if denom <= 0.0 {
            continue;
        }
        let x = abs_s + r;
        if x == 0.0 {
            // s = 0: the Pochhammer symbol vanishes and so does the remainder
            return f64::NEG_INFINITY;
        }
        let poch = ln_gamma(x + 2.0 * mf) - ln_gamma(x);
        let mut l = common + poch + (1.0 - s.re + r - 2.0 * mf) * ln_n - denom.ln();
        if order > 0 {
            l += ln_factorial(order) - order as f64 * r.ln();
        }
        best = best.min(l);
    }
    // small safety margin for the log-gamma approximation
    best + 1e-9
}

/// ln Γ(x) for x > 0 by upward recurrence and the Stirling series.
fn ln_gamma(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 8.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// Natural log of the bound on |R^{(order)}(s)| for the remainder after N−1
/// Dirichlet terms and M Bernoulli corrections.
fn log_remainder_bound(s: Complex64, n: u64, m: usize, order: usize) -> f64 {
    let radii: &[f64] = if order == 0 { &[0.0] } else { &CAUCHY_RADII };
    let ln_n = (n as f64).ln();
    let abs_s = s.norm();
    let mut best = f64::INFINITY;
    for &r in radii {
        let denom = s.re - r + 2.0 * m as f64 - 1.0;
        if denom <= 0.0 {
            continue;
        }
        // |B_2M|/(2M)! = 2 ζ(2M) / (2π)^{2M} and ζ(2M) <= π²/6
        let mut log_bound = (2.0 * PI * PI / 6.0).ln() - 2.0 * m as f64 * (2.0 * PI).ln();
        for i in 0..2 * m {
            log_bound += (abs_s + r + i as f64).ln();
        }
        log_bound += (1.0 - s.re + r - 2.0 * m as f64) * ln_n - denom.ln();
        if order > 0 {
            log_bound += ln_factorial(order) - order as f64 * r.ln();
        }
        best = best.min(log_bound);
    }
    best
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// B_{2j}/(2j)! for j = 1..=MAX_BERNOULLI_TERMS (index j−1).
fn bernoulli_coefficients() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        const EXACT: [(f64, f64); 10] = [
            (1.0, 6.0),
            (-1.0, 30.0),
            (1.0, 42.0),
            (-1.0, 30.0),
            (5.0, 66.0),
            (-691.0, 2730.0),
            (7.0, 6.0),
            (-3617.0, 510.0),
            (43867.0, 798.0),
            (-174611.0, 330.0),
        ];
        let mut table = Vec::with_capacity(MAX_BERNOULLI_TERMS);
        let mut factorial = 1.0f64;
        for j in 1..=MAX_BERNOULLI_TERMS {
            factorial *= ((2 * j - 1) * (2 * j)) as f64;
            if j <= EXACT.len() {
                let (num, den) = EXACT[j - 1];
                table.push(num / den / factorial);
            } else {
                let two_j = (2 * j) as i32;
                let zeta: f64 = (1..=20).rev().map(|n| (n as f64).powi(-two_j)).sum();
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                table.push(sign * 2.0 * zeta / (2.0 * PI).powi(two_j));
            }
        }
        table
    })
}

fn ln_table() -> &'static [DoubleDouble] {
    static TABLE: OnceLock<Vec<DoubleDouble>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_TABLE_SIZE);
        t.push(DoubleDouble::ZERO);
        for n in 1..LN_TABLE_SIZE as u64 {
            t.push(DoubleDouble::ln_integer(n));
        }
        t
    })
}

fn ln_dd(n: u64) -> DoubleDouble {
    if (n as usize) < LN_TABLE_SIZE {
        ln_table()[n as usize]
    } else {
        DoubleDouble::ln_integer(n)
    }
}

/// n^{-s} with the phase `t ln n` reduced in double-double.
fn pow_neg(ln_n: DoubleDouble, s: Complex64) -> Complex64 {
    let magnitude = (-s.re * ln_n.hi).exp() * (1.0 - s.re * ln_n.lo);
    let theta = (DoubleDouble::from_f64(s.im) * ln_n).reduce_two_pi();
    let (sin_hi, cos_hi) = theta.hi.sin_cos();
    let sin = sin_hi + cos_hi * theta.lo;
    let cos = cos_hi - sin_hi * theta.lo;
    Complex64::new(magnitude * cos, -magnitude * sin)
}

type Jet = [Complex64; MAX_JET_ORDER + 1];

fn jet_mul(a: &Jet, b: &Jet, len: usize) -> Jet {
    let mut out = [Complex64::new(0.0, 0.0); MAX_JET_ORDER + 1];
    for i in 0..len {
        for j in 0..len - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// Jet of `s + ε + shift`.
fn jet_linear(s: Complex64, shift: f64) -> Jet {
    let mut out = [Complex64::new(0.0, 0.0); MAX_JET_ORDER + 1];
    out[0] = s + shift;
    out[1] = Complex64::new(1.0, 0.0);
    out
}

/// Evaluates the Taylor coefficients of ζ(s + ε) up to ε^{len-1} together with
/// a rounding-error budget per coefficient.
///
/// The budget is `Σ |term| · (operation count) · ε` over every term that
/// enters the coefficient; the double-double accumulator itself adds nothing
/// at this scale.
fn euler_maclaurin_jet(s: Complex64, n: u64, m: usize, len: usize) -> (Vec<Complex64>, Vec<f64>) {
    let mut acc = vec![ComplexAccumulator::default(); len];
    let mut budget = vec![0.0; len];
    let sigma_abs = s.re.abs();

    // Dirichlet partial sum over 1..n-1
    for k in 1..n {
        let ln_k = ln_dd(k);
        let base = pow_neg(ln_k, s);
        let base_abs = base.norm();
        let ops = 6.0 + sigma_abs * ln_k.hi;
        let mut weight = 1.0;
        for j in 0..len {
            if j > 0 {
                weight *= -ln_k.hi / j as f64;
            }
            let term = base * weight;
            acc[j].add(term.re, term.im);
            budget[j] += base_abs * weight.abs() * (ops + 2.0 * j as f64);
        }
    }

    // tail: N^{1-s}/(s-1) + N^{-s}/2 + Σ_j B_2j/(2j)! (s)_{2j-1} N^{-s-2j+1}
    let ln_big = ln_dd(n);
    let nf = n as f64;
    let base = pow_neg(ln_big, s);
    let zero = Complex64::new(0.0, 0.0);
    let mut power: Jet = [zero; MAX_JET_ORDER + 1];
    let mut w = 1.0;
    for j in 0..len {
        if j > 0 {
            w *= -ln_big.hi / j as f64;
        }
        power[j] = base * w;
    }
    let base_ops = 6.0 + sigma_abs * ln_big.hi;

    let mut tail: Jet = [zero; MAX_JET_ORDER + 1];
    let add_term = |tail: &mut Jet, budget: &mut [f64], term: &Jet, ops: f64| {
        for j in 0..len {
            tail[j] += term[j];
            budget[j] += term[j].norm() * (ops + 4.0 * j as f64);
        }
    };

    // 1/(s - 1 + ε) = Σ (-1)^i ε^i / (s-1)^{i+1}
    let c = s - 1.0;
    let mut inv: Jet = [zero; MAX_JET_ORDER + 1];
    let mut p = 1.0 / c;
    for item in inv.iter_mut().take(len) {
        *item = p;
        p = -p / c;
    }
    let mut integral = jet_mul(&power, &inv, len);
    for v in integral.iter_mut().take(len) {
        *v *= nf;
    }
    add_term(&mut tail, &mut budget, &integral, base_ops + 8.0);

    let mut half = power;
    for v in half.iter_mut().take(len) {
        *v *= 0.5;
    }
    add_term(&mut tail, &mut budget, &half, base_ops + 1.0);

    if base != zero {
        // weight_j = B_2j/(2j)! (s+ε)_{2j-1} N^{-2j+1}, advanced by ratios so
        // that neither the Pochhammer symbol nor N^{-2j} leaves double range
        let coeffs = bernoulli_coefficients();
        let mut weight = jet_linear(s, 0.0);
        for v in weight.iter_mut().take(len) {
            *v *= coeffs[0] / nf;
        }
        for j in 1..=m {
            let term = jet_mul(&weight, &power, len);
            add_term(&mut tail, &mut budget, &term, base_ops + 12.0 * j as f64);
            if j == m {
                break;
            }
            let ratio = coeffs[j] / coeffs[j - 1] / (nf * nf);
            weight = jet_mul(&weight, &jet_linear(s, (2 * j - 1) as f64), len);
            weight = jet_mul(&weight, &jet_linear(s, (2 * j) as f64), len);
            for v in weight.iter_mut().take(len) {
                *v *= ratio;
            }
        }
    }

    let mut values = Vec::with_capacity(len);
    for j in 0..len {
        acc[j].add(tail[j].re, tail[j].im);
        let (re, im) = acc[j].value();
        values.push(Complex64::new(re, im));
    }
    (values, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im).unwrap()
    }

    #[test]
    fn zeta_two_is_pi_squared_over_six() {
        let r = eval_zeta_derivative(pt(2.0, 0.0), 0, 1e-14).unwrap();
        assert!((r.value.re - PI * PI / 6.0).abs() < 1e-12);
        assert!(r.value.im.abs() < 1e-15);
        assert!(r.abs_error_bound > 0.0 && r.abs_error_bound <= 1e-14);
        assert!(r.terms_used >= 1);
    }

    #[test]
    fn zeta_zero_and_derivative_at_zero() {
        let r0 = eval_zeta_derivative(pt(0.0, 0.0), 0, 1e-14).unwrap();
        assert!((r0.value.re + 0.5).abs() < 1e-12);
        let r1 = eval_zeta_derivative(pt(0.0, 0.0), 1, 1e-13).unwrap();
        assert!((r1.value.re + 0.5 * (2.0 * PI).ln()).abs() < 1e-12);
    }

    #[test]
    fn shifted_value_subtracts_target() {
        let t = TargetSpec::real(PI * PI / 6.0, 0).unwrap();
        let r = eval_shifted(pt(2.0, 0.0), &t, 1e-14).unwrap();
        assert!(r.value.norm() < 1e-12);
        let t = TargetSpec::real(-0.5, 0).unwrap();
        assert!(eval_shifted(pt(0.0, 0.0), &t, 1e-14).unwrap().value.norm() < 1e-12);
        let zero = TargetSpec::real(0.0, 3).unwrap();
        let s = pt(0.7, 33.0);
        assert_eq!(
            eval_shifted(s, &zero, 1e-12).unwrap(),
            eval_zeta_derivative(s, 3, 1e-12).unwrap()
        );
    }

    #[test]
    fn uncertifiable_target_is_refused() {
        // the worst-case rounding budget for ζ'(0) sits just above 1e-14
        assert!(matches!(
            eval_zeta_derivative(pt(0.0, 0.0), 1, 1e-14),
            Err(ZetaError::AccuracyNotReached { .. })
        ));
    }

    #[test]
    fn pole_is_refused() {
        assert!(matches!(
            eval_zeta_derivative(pt(1.0 + 5e-4, 0.0), 0, 1e-10),
            Err(ZetaError::PoleProximity { .. })
        ));
        assert!(eval_zeta_derivative(pt(1.0 + 2e-3, 0.0), 0, 1e-10).is_ok());
    }

    #[test]
    fn input_validation() {
        assert!(matches!(eval_zeta_derivative(pt(2.0, 0.0), 5, 1e-10), Err(ZetaError::OrderTooLarge(5))));
        assert!(matches!(eval_zeta_derivative(pt(2.0, 0.0), 0, 1e-15), Err(ZetaError::InvalidAccuracy(_))));
        assert!(matches!(eval_zeta_derivative(pt(2.0, 0.0), 0, f64::NAN), Err(ZetaError::InvalidAccuracy(_))));
        assert!(ComplexPoint::new(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn bernoulli_table_spot_values() {
        let c = bernoulli_coefficients();
        assert!((c[0] - 1.0 / 12.0).abs() < 1e-18);
        assert!((c[1] + 1.0 / 720.0).abs() < 1e-19);
        // B_22/22! and B_40/40!
        assert!((c[10] / 5.5090028283602295e-18 - 1.0).abs() < 1e-13, "{}", c[10]);
        assert!((c[19] / -2.36502241570063e-32 - 1.0).abs() < 1e-13, "{}", c[19]);
    }

    #[test]
    fn fast_bound_agrees_with_direct_sum() {
        for (re, im) in [(0.5, 14.0), (-2.0, 900.0), (6.0, 3.0), (0.0, 0.0)] {
            let s = Complex64::new(re, im);
            for (n, m, order) in [(10u64, 5usize, 0usize), (50, 20, 3), (400, 60, 5), (2, 1, 1)] {
                let slow = log_remainder_bound(s, n, m, order);
                let fast = log_remainder_bound_fast(s, s.norm(), n, m, order);
                if slow.is_infinite() {
                    assert_eq!(fast, slow);
                } else {
                    assert!(fast >= slow - 1e-9 && fast - slow < 1e-7, "{re} {im} {n} {m} {order}: {slow} {fast}");
                }
            }
        }
    }

    #[test]
    fn large_real_argument_is_one() {
        let r = eval_zeta_derivative(pt(4.0e6, 0.0), 0, 1e-14).unwrap();
        assert_eq!(r.value.re, 1.0);
        let r = eval_zeta_derivative(pt(4.0e6, 0.0), 2, 1e-14).unwrap();
        assert!(r.value.norm() < 1e-300);
    }
}
