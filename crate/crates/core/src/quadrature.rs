//! Adaptive 7/15-point Gauss–Kronrod quadrature for complex integrands.
//!
//! An optional phase-rate bound `ω(x)` caps the initial panel widths so
//! that `ω·width <= π/2` on every panel before adaptive refinement starts.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance {tolerance:e} on [{a}, {b}]")]
    Failure { a: f64, b: f64, tolerance: f64 },
    #[error("phase on [{a}, {b}] needs more than {limit} panels")]
    TooOscillatory { a: f64, b: f64, limit: usize },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("integrand evaluation failed at x = {x}: {message}")]
    Integrand { x: f64, message: String },
}

const KRONROD_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 48;
const MAX_INITIAL_PANELS: usize = 1 << 22;

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    /// Absolute error target for the whole interval.
    pub tolerance: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { tolerance: 1e-10 }
    }
}

type Integrand<'a> = dyn Fn(f64) -> Result<Complex64, QuadError> + Sync + 'a;

/// One 15-point Kronrod estimate and its distance from the embedded Gauss rule.
fn kronrod(f: &Integrand, a: f64, b: f64) -> Result<(Complex64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    for i in 0..8 {
        let x = KRONROD_NODES[i];
        let pair = if x == 0.0 {
            eval(f, center)?
        } else {
            eval(f, center - half * x)? + eval(f, center + half * x)?
        };
        k += pair * KRONROD_WEIGHTS[i];
        if i % 2 == 1 {
            g += pair * GAUSS_WEIGHTS[i / 2];
        }
    }
    Ok((k * half, ((k - g) * half).norm()))
}

fn eval(f: &Integrand, x: f64) -> Result<Complex64, QuadError> {
    let v = f(x)?;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(QuadError::NonFinite(x))
    }
}

fn adapt(f: &Integrand, a: f64, b: f64, tolerance: f64, depth: u32) -> Result<Complex64, QuadError> {
    let (value, error) = kronrod(f, a, b)?;
    if error <= tolerance || (error <= 64.0 * f64::EPSILON * value.norm()) {
        return Ok(value);
    }
    let mid = 0.5 * (a + b);
    if depth >= MAX_DEPTH || mid <= a || mid >= b {
        return Err(QuadError::Failure { a, b, tolerance });
    }
    Ok(adapt(f, a, mid, 0.5 * tolerance, depth + 1)? + adapt(f, mid, b, 0.5 * tolerance, depth + 1)?)
}

/// Splits `[a, b]` so that `rate(x)·width <= π/2` at both ends of every panel.
fn phase_panels(a: f64, b: f64, rate: &(dyn Fn(f64) -> f64 + Sync)) -> Result<Vec<(f64, f64)>, QuadError> {
    let mut panels = Vec::new();
    let mut x = a;
    while x < b {
        let mut width = b - x;
        let r = rate(x).abs();
        if r > 0.0 {
            width = width.min(FRAC_PI_2 / r);
        }
        loop {
            let end = if x + width >= b { b } else { x + width };
            if rate(end).abs() * (end - x) <= FRAC_PI_2 || end - x <= 1e-12 * (1.0 + x.abs()) {
                panels.push((x, end));
                x = end;
                break;
            }
            width *= 0.5;
        }
        if panels.len() > MAX_INITIAL_PANELS {
            return Err(QuadError::TooOscillatory { a, b, limit: MAX_INITIAL_PANELS });
        }
    }
    Ok(panels)
}

/// `∫_a^b f`, with optional oscillation-aware initial panelling.
///
/// Panels are integrated in parallel and summed left to right, so the
/// result does not depend on the thread count.
pub fn integrate_complex(
    f: &Integrand,
    a: f64,
    b: f64,
    opts: &QuadOptions,
    phase_rate: Option<&(dyn Fn(f64) -> f64 + Sync)>,
) -> Result<Complex64, QuadError> {
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(QuadError::InvalidInterval(a, b));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let panels = match phase_rate {
        Some(rate) => phase_panels(a, b, rate)?,
        None => vec![(a, b)],
    };
    let length = b - a;
    let parts: Vec<Complex64> = panels
        .par_iter()
        .map(|&(x0, x1)| adapt(f, x0, x1, opts.tolerance * (x1 - x0) / length, 0))
        .collect::<Result<_, _>>()?;
    let mut re = crate::dd::DoubleDouble::ZERO;
    let mut im = crate::dd::DoubleDouble::ZERO;
    for p in parts {
        re = re.add_f64(p.re);
        im = im.add_f64(p.im);
    }
    Ok(Complex64::new(re.to_f64(), im.to_f64()))
}

/// Real-valued convenience wrapper around [`integrate_complex`].
pub fn integrate_real(
    f: &(dyn Fn(f64) -> Result<f64, QuadError> + Sync),
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<f64, QuadError> {
    let g = |x: f64| f(x).map(|v| Complex64::new(v, 0.0));
    Ok(integrate_complex(&g, a, b, opts, None)?.re)
}
