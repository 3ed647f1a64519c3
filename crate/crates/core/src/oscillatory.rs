//! Oscillatory integrals: the first-derivative-test bound `4/m`, the smooth
//! part S1 of an exponential sum over ordinates, and the S = S1 + S2 split.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apoint::{ApointCache, CacheError};
use crate::counting::n_ak;
use crate::dd::ComplexAccumulator;
use crate::families::{FamilyError, FunctionFamily};
use crate::quadrature::{integrate_complex, integrate_real, QuadError, QuadOptions};
use crate::target::TargetSpec;

/// Number of samples used to validate a test case.
pub const VALIDATION_SAMPLES: usize = 10_000;

#[derive(Debug, Error)]
pub enum OscError {
    #[error("test case invariant violated: {0}")]
    InvariantViolated(String),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(#[from] QuadError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    CacheIncomplete(#[from] CacheError),
    #[error("invalid range: {0}")]
    InvalidRange(String),
}

type RealFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// `∫_a^b G e^{iF}` with `F'/G` single-signed, `|F'/G| >= m` and `G/F'` monotonic.
pub struct OscillatoryTestCase {
    phase: RealFn,
    phase_derivative: RealFn,
    amplitude: RealFn,
    a: f64,
    b: f64,
    m: f64,
}

impl std::fmt::Debug for OscillatoryTestCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OscillatoryTestCase").field("a", &self.a).field("b", &self.b).field("m", &self.m).finish()
    }
}

impl OscillatoryTestCase {
    /// Validates the hypotheses on a uniform sample of [`VALIDATION_SAMPLES`] points.
    pub fn new(phase: RealFn, phase_derivative: RealFn, amplitude: RealFn, a: f64, b: f64, m: f64) -> Result<Self, OscError> {
        let bad = |msg: String| Err(OscError::InvariantViolated(msg));
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return bad(format!("need a < b, got [{a}, {b}]"));
        }
        if !(m > 0.0) || !m.is_finite() {
            return bad(format!("need m > 0, got {m}"));
        }
        let mut sign = 0.0;
        let mut direction = 0.0;
        let mut previous: Option<f64> = None;
        for i in 0..VALIDATION_SAMPLES {
            let x = a + (b - a) * i as f64 / (VALIDATION_SAMPLES - 1) as f64;
            let ratio = phase_derivative(x) / amplitude(x);
            if !ratio.is_finite() || ratio == 0.0 {
                return bad(format!("F'/G is {ratio} at x = {x}"));
            }
            if sign == 0.0 {
                sign = ratio.signum();
            } else if ratio.signum() != sign {
                return bad(format!("F'/G changes sign at x = {x}"));
            }
            if ratio.abs() < m {
                return bad(format!("|F'/G| = {} < m = {m} at x = {x}", ratio.abs()));
            }
            let inverse = 1.0 / ratio;
            if let Some(p) = previous {
                let step = inverse - p;
                if step.abs() > 1e-12 * inverse.abs().max(p.abs()) {
                    if direction == 0.0 {
                        direction = step.signum();
                    } else if step.signum() != direction {
                        return bad(format!("G/F' is not monotonic near x = {x}"));
                    }
                }
            }
            previous = Some(inverse);
        }
        Ok(OscillatoryTestCase { phase, phase_derivative, amplitude, a, b, m })
    }

    /// `F = λ x^p`, `G = g x^q` on `[a, b]` with `0 < a`, with the exact
    /// `m = min |F'/G|` (shrunk by one part in 10^12).
    pub fn power(lambda: f64, p: f64, g: f64, q: f64, a: f64, b: f64) -> Result<Self, OscError> {
        if !(a > 0.0) {
            return Err(OscError::InvariantViolated(format!("power case needs a > 0, got {a}")));
        }
        let e = p - 1.0 - q;
        let scale = (lambda * p / g).abs();
        let m = scale * a.powf(e).min(b.powf(e)) * (1.0 - 1e-12);
        Self::new(
            Box::new(move |x| lambda * x.powf(p)),
            Box::new(move |x| lambda * p * x.powf(p - 1.0)),
            Box::new(move |x| g * x.powf(q)),
            a,
            b,
            m,
        )
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma43Outcome {
    pub integral: Complex64,
    pub bound: f64,
    pub pass: bool,
}

pub fn lemma43_check(case: &OscillatoryTestCase, quad_tolerance: f64) -> Result<Lemma43Outcome, OscError> {
    let integrand = |x: f64| Ok(Complex64::from_polar((case.amplitude)(x), (case.phase)(x)));
    let rate = |x: f64| (case.phase_derivative)(x);
    let integral = integrate_complex(&integrand, case.a, case.b, &QuadOptions { tolerance: quad_tolerance }, Some(&rate))?;
    let bound = 4.0 / case.m;
    Ok(Lemma43Outcome { integral, bound, pass: integral.norm() <= bound + quad_tolerance })
}

fn check_range(c: f64, t: f64) -> Result<(), OscError> {
    if !(c > E) || !c.is_finite() {
        return Err(OscError::Family(FamilyError::DomainError(c)));
    }
    if !(t >= c) || !t.is_finite() {
        return Err(OscError::InvalidRange(format!("need T >= c, got T = {t}, c = {c}")));
    }
    Ok(())
}

fn integrand_error(x: f64, e: FamilyError) -> QuadError {
    QuadError::Integrand { x, message: e.to_string() }
}

/// `(1/2π) ∫_c^T e^{i f(t)} log(t / (2 n π)) dt`.
pub fn compute_s1(family: &FunctionFamily, target: &TargetSpec, c: f64, t: f64, quad_tolerance: f64) -> Result<Complex64, OscError> {
    check_range(c, t)?;
    let log_shift = (2.0 * n_ak(target) as f64 * PI).ln();
    let integrand = |x: f64| {
        let phase = family.eval_f(x, 0).map_err(|e| integrand_error(x, e))?;
        Ok(Complex64::from_polar(x.ln() - log_shift, phase))
    };
    let rate = |x: f64| family.eval_f(x, 1).unwrap_or(0.0);
    let opts = QuadOptions { tolerance: quad_tolerance * 2.0 * PI };
    Ok(integrate_complex(&integrand, c, t, &opts, Some(&rate))? / (2.0 * PI))
}

/// `∫_c^T |f'(t)| log t dt`.
pub fn integral_fprime_log(family: &FunctionFamily, c: f64, t: f64, quad_tolerance: f64) -> Result<f64, OscError> {
    check_range(c, t)?;
    let integrand = |x: f64| family.eval_f(x, 1).map(|d| d.abs() * x.ln()).map_err(|e| integrand_error(x, e));
    Ok(integrate_real(&integrand, c, t, &QuadOptions { tolerance: quad_tolerance })?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub target: TargetSpec,
    pub family: FunctionFamily,
    pub c: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// Number of ordinates in (c, T], with multiplicity.
    pub count: u64,
    #[serde(rename = "S_total")]
    pub s_total: Complex64,
    #[serde(rename = "S1")]
    pub s1: Complex64,
    #[serde(rename = "S2")]
    pub s2: Complex64,
    pub envelope_terms: BTreeMap<String, f64>,
}

impl DecompositionReport {
    /// `|S_total| / (N(T) − N(c))`, zero when no ordinate lies in (c, T].
    pub fn normalized_total(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.s_total.norm() / self.count as f64
        }
    }

    /// Sum of the three S1 envelope terms.
    pub fn s1_envelope(&self) -> f64 {
        ["logT_over_fprime", "inv_TfprimeSq", "fpp_logT_over_fprime3"].iter().map(|k| self.envelope_terms[*k]).sum()
    }
}

/// `Σ_{c<γ<=T} e^{i f(γ)}` over cached ordinates, with multiplicity.
pub fn exponential_sum(family: &FunctionFamily, ordinates: &[(f64, u32)]) -> Result<Complex64, OscError> {
    let mut acc = ComplexAccumulator::default();
    for &(gamma, m) in ordinates {
        let z = Complex64::from_polar(m as f64, family.eval_f(gamma, 0)?);
        acc.add(z.re, z.im);
    }
    let (re, im) = acc.value();
    Ok(Complex64::new(re, im))
}

pub fn decompose(
    family: &FunctionFamily,
    target: &TargetSpec,
    c: f64,
    t: f64,
    cache: &ApointCache,
    quad_tolerance: f64,
) -> Result<DecompositionReport, OscError> {
    check_range(c, t)?;
    let ordinates = cache.ordinates(target, c, t)?;
    let count = ordinates.iter().map(|&(_, m)| m as u64).sum();
    let s_total = exponential_sum(family, &ordinates)?;
    let s1 = compute_s1(family, target, c, t, quad_tolerance)?;
    let s2 = s_total - s1;

    let [_, d1, d2] = family.derivatives(t)?;
    let log_t = t.ln();
    let mut envelope_terms = BTreeMap::new();
    envelope_terms.insert("logT_over_fprime".to_string(), log_t / d1.abs());
    envelope_terms.insert("inv_TfprimeSq".to_string(), 1.0 / (t * d1 * d1));
    envelope_terms.insert("fpp_logT_over_fprime3".to_string(), d2.abs() * log_t / d1.abs().powi(3));
    envelope_terms.insert("logT".to_string(), log_t);
    envelope_terms.insert("integral_fprime_logt".to_string(), integral_fprime_log(family, c, t, quad_tolerance)?);

    Ok(DecompositionReport { target: *target, family: *family, c, t, count, s_total, s1, s2, envelope_terms })
}
