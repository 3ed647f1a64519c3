//! Argument-principle machinery: phase tracking along segments and winding
//! numbers of axis-aligned rectangles.
//!
//! A step from `z` to `z + h·dir` is accepted when the phase increment
//! predicted by the trapezoid rule on `g'/g` is small and agrees with the
//! wrapped increment `arg(g(z+h·dir)/g(z))`; otherwise the step is halved.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{AnalyticFunction, EngineError, MIN_CONTOUR_DISTANCE};

/// Closed rectangle `[sigma0, sigma1] × [t0, t1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub sigma0: f64,
    pub sigma1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl Rect {
    pub fn new(sigma0: f64, sigma1: f64, t0: f64, t1: f64) -> Self {
        debug_assert!(sigma0 < sigma1 && t0 < t1);
        Rect { sigma0, sigma1, t0, t1 }
    }

    pub fn width(&self) -> f64 {
        self.sigma1 - self.sigma0
    }

    pub fn height(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.sigma0 + self.sigma1), 0.5 * (self.t0 + self.t1))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.sigma0..=self.sigma1).contains(&z.re) && (self.t0..=self.t1).contains(&z.im)
    }

    /// Square of half-side `r` centred at `z`.
    pub fn around(z: Complex64, r: f64) -> Self {
        Rect::new(z.re - r, z.re + r, z.im - r, z.im + r)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WalkOptions {
    /// Largest accepted predicted phase increment per step.
    pub max_step_phase: f64,
    /// Largest accepted disagreement between predicted and observed increments.
    pub agreement: f64,
    /// Longest step along the segment.
    pub max_step: f64,
    /// Contours closer than this to a root (by the Newton distance estimate) are rejected.
    pub min_distance: f64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions { max_step_phase: PI / 4.0, agreement: PI / 8.0, max_step: 0.5, min_distance: MIN_CONTOUR_DISTANCE }
    }
}

impl WalkOptions {
    fn tightened(&self) -> Self {
        WalkOptions {
            max_step_phase: self.max_step_phase / 2.0,
            agreement: self.agreement / 2.0,
            max_step: self.max_step / 2.0,
            ..*self
        }
    }
}

#[derive(Clone, Copy)]
struct Sample {
    g: Complex64,
    log_derivative: Complex64,
}

fn sample<F: AnalyticFunction + ?Sized>(f: &F, z: Complex64, opts: &WalkOptions) -> Result<Sample, EngineError> {
    let (g, dg) = f.eval(z)?;
    let too_close = if g == Complex64::new(0.0, 0.0) {
        true
    } else {
        // first-order distance to the nearest root
        dg != Complex64::new(0.0, 0.0) && g.norm() < opts.min_distance * dg.norm()
    };
    if too_close {
        return Err(EngineError::ContourTooClose { re: z.re, im: z.im });
    }
    Ok(Sample { g, log_derivative: dg / g })
}

/// Cumulative phases recorded while walking parallel segments.
#[derive(Clone, Debug, Default)]
pub(crate) struct LineTrack {
    /// Distance along the segments at each accepted sample.
    pub params: Vec<f64>,
    /// `phases[line][i]`: accumulated change of arg g from the start of `line`.
    pub phases: Vec<Vec<f64>>,
}

/// Walks the segments `starts[i] + u·dir`, `u ∈ [0, length]`, with a shared
/// step sequence: a step is taken only when it is acceptable on every line.
pub(crate) fn walk_lines<F: AnalyticFunction + ?Sized>(
    f: &F,
    starts: &[Complex64],
    dir: Complex64,
    length: f64,
    opts: &WalkOptions,
    record: bool,
) -> Result<LineTrack, EngineError> {
    let lines = starts.len();
    let mut track = LineTrack { params: vec![0.0], phases: vec![vec![0.0]; lines] };
    let mut current: Vec<Sample> = starts.iter().map(|&z| sample(f, z, opts)).collect::<Result<_, _>>()?;
    let mut totals = vec![0.0; lines];
    let mut u = 0.0;
    let mut h = opts.max_step.min(length);
    let min_step = 1e-12 * (1.0 + length);
    while u < length {
        // stay inside the disc of radius |g/g'| around the current point
        let reach = current.iter().map(|s| 1.0 / s.log_derivative.norm()).fold(f64::INFINITY, f64::min);
        h = h.min(reach);
        let next_u = if u + h >= length * (1.0 - 1e-15) { length } else { u + h };
        let step = next_u - u;
        let mut next = Vec::with_capacity(lines);
        let mut deltas = Vec::with_capacity(lines);
        let mut accepted = true;
        for (i, start) in starts.iter().enumerate() {
            let z = start + dir * next_u;
            let s = sample(f, z, opts)?;
            let predicted = (0.5 * (current[i].log_derivative + s.log_derivative) * dir * step).im;
            let observed = (s.g / current[i].g).arg();
            let within_reach = step * s.log_derivative.norm() <= 1.0;
            if !within_reach || predicted.abs() > opts.max_step_phase || (observed - predicted).abs() > opts.agreement {
                accepted = false;
                break;
            }
            next.push(s);
            deltas.push(observed);
        }
        if !accepted {
            h = step * 0.5;
            if h < min_step {
                let z = starts[0] + dir * u;
                return Err(EngineError::ContourTooClose { re: z.re, im: z.im });
            }
            continue;
        }
        for i in 0..lines {
            totals[i] += deltas[i];
            if record {
                track.phases[i].push(totals[i]);
            }
        }
        if record {
            track.params.push(next_u);
        }
        current = next;
        u = next_u;
        h = (step * 1.5).min(opts.max_step);
    }
    if !record {
        track.params.push(length);
        for i in 0..lines {
            track.phases[i].push(totals[i]);
        }
    }
    Ok(track)
}

/// Change of arg g along the segment from `a` to `b`.
pub(crate) fn segment_phase<F: AnalyticFunction + ?Sized>(
    f: &F,
    a: Complex64,
    b: Complex64,
    opts: &WalkOptions,
) -> Result<f64, EngineError> {
    let length = (b - a).norm();
    if length == 0.0 {
        return Ok(0.0);
    }
    let dir = (b - a) / length;
    let track = walk_lines(f, &[a], dir, length, opts, false)?;
    Ok(*track.phases[0].last().expect("walk records the endpoint"))
}

/// Total phase change of g around `rect`, counter-clockwise, in turns.
pub(crate) fn winding_turns<F: AnalyticFunction + ?Sized>(f: &F, rect: &Rect, opts: &WalkOptions) -> Result<f64, EngineError> {
    let corners = [
        Complex64::new(rect.sigma0, rect.t0),
        Complex64::new(rect.sigma1, rect.t0),
        Complex64::new(rect.sigma1, rect.t1),
        Complex64::new(rect.sigma0, rect.t1),
    ];
    let mut total = 0.0;
    for i in 0..4 {
        total += segment_phase(f, corners[i], corners[(i + 1) % 4], opts)?;
    }
    Ok(total / (2.0 * PI))
}

/// Rounds a phase total (in turns) to the enclosed root count.
pub(crate) fn turns_to_count(turns: f64) -> Result<u64, EngineError> {
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.01 || rounded < 0.0 {
        return Err(EngineError::WindingNotInteger { turns });
    }
    Ok(rounded as u64)
}

/// Number of roots of g inside `rect`, counted with multiplicity.
///
/// Retries with tighter step control when the phase total misses an integer.
pub fn winding_number<F: AnalyticFunction + ?Sized>(f: &F, rect: &Rect, opts: &WalkOptions) -> Result<u64, EngineError> {
    let mut opts = *opts;
    let mut last = None;
    for _ in 0..3 {
        let turns = winding_turns(f, rect, &opts)?;
        match turns_to_count(turns) {
            Ok(n) => return Ok(n),
            Err(e) => last = Some(e),
        }
        opts = opts.tightened();
    }
    Err(last.expect("at least one attempt"))
}
