use std::f64::consts::PI;

use num_complex::Complex64;

use super::cache::canonical_gamma;
use super::contour::{segment_phase, turns_to_count, walk_lines, winding_number, Rect, WalkOptions};
use super::{
    APoint, AnalyticFunction, EngineError, ShiftedZeta, StripWindow, DEFAULT_SIGMA_MAX, DEFAULT_SIGMA_MIN, MAX_RESIDUAL,
};
use crate::target::TargetSpec;
use crate::zeta::ComplexPoint;

/// Outward shifts tried, in order, when an outer edge passes too close to a root.
const EDGE_PERTURBATIONS: [f64; 6] = [0.0, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2];
/// Relative split positions tried when subdividing a box.
const SPLIT_FRACTIONS: [f64; 6] = [0.5, 0.43, 0.57, 0.35, 0.65, 0.27];
const NEWTON_ITERATIONS: usize = 30;
const DERIVATIVE_FLOOR: f64 = 1e-12;
const TINY_BOX: f64 = 1e-4;
const MAX_BOX_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug)]
pub struct EngineConfig {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Evaluation accuracy while tracking phases.
    pub walk_accuracy: f64,
    /// Evaluation accuracy during Newton polishing.
    pub newton_accuracy: f64,
    pub walk: WalkOptions,
    /// Vertical edges are tracked in independent chunks of this length.
    pub chunk_length: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            sigma_min: DEFAULT_SIGMA_MIN,
            sigma_max: DEFAULT_SIGMA_MAX,
            walk_accuracy: 1e-10,
            newton_accuracy: 1e-12,
            walk: WalkOptions::default(),
            chunk_length: 32.0,
        }
    }
}

/// A root of a generic analytic function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub z: Complex64,
    pub residual: f64,
    pub multiplicity: u32,
}

/// Number of a-points in `window`, counted with multiplicity.
pub fn count_in_window(target: &TargetSpec, window: &StripWindow) -> Result<u64, EngineError> {
    let cfg = EngineConfig::default();
    let f = ShiftedZeta::new(*target, cfg.walk_accuracy);
    let mut last = None;
    for delta in EDGE_PERTURBATIONS {
        let rect = perturb_outward(&window.rect(), delta);
        match winding_number(&f, &rect, &cfg.walk) {
            Ok(n) => return Ok(n),
            Err(e @ EngineError::ContourTooClose { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("perturbations attempted"))
}

/// Count over the default strip between two heights; heights at or below 1
/// are clamped and an empty range counts zero.
pub fn count_between(target: &TargetSpec, t_low: f64, t_high: f64) -> Result<u64, EngineError> {
    let t_low = t_low.max(1.0 + 1e-9);
    if t_low >= t_high {
        return Ok(0);
    }
    count_in_window(target, &StripWindow::strip(t_low, t_high)?)
}

/// All a-points with `t_low < γ <= t_high` in the default strip, sorted by γ.
pub fn locate_apoints(target: &TargetSpec, t_low: f64, t_high: f64) -> Result<Vec<APoint>, EngineError> {
    let window = StripWindow::strip(t_low, t_high)?;
    locate_in_window(target, &window, &EngineConfig::default())
}

pub fn locate_in_window(target: &TargetSpec, window: &StripWindow, cfg: &EngineConfig) -> Result<Vec<APoint>, EngineError> {
    let walker = ShiftedZeta::new(*target, cfg.walk_accuracy);
    let polisher = ShiftedZeta::new(*target, cfg.newton_accuracy);
    let roots = locate_roots(&walker, &polisher, &window.rect(), cfg)?;
    roots.into_iter().map(|r| to_apoint(&polisher, r, target)).collect()
}

/// Newton polish of `seed` for the target equation.
pub fn refine(seed: ComplexPoint, target: &TargetSpec) -> Result<APoint, EngineError> {
    let cfg = EngineConfig::default();
    let f = ShiftedZeta::new(*target, cfg.newton_accuracy);
    let root = refine_root(&f, seed.to_complex(), &cfg)?;
    to_apoint(&f, root, target)
}

/// Rounds γ to its cache representation and re-measures the residual there.
fn to_apoint(f: &ShiftedZeta, root: Root, target: &TargetSpec) -> Result<APoint, EngineError> {
    let gamma = canonical_gamma(root.z.im);
    let z = Complex64::new(root.z.re, gamma);
    let residual = if z == root.z { root.residual } else { f.eval(z)?.0.norm() };
    APoint::new(z.re, gamma, *target, residual, root.multiplicity)
}

fn perturb_outward(rect: &Rect, delta: f64) -> Rect {
    let t0 = if rect.t0 - delta > 1.0 { rect.t0 - delta } else { rect.t0 + delta };
    Rect::new(rect.sigma0 - delta, rect.sigma1 + delta, t0.min(rect.t1), rect.t1 + delta)
}

/// Every root of `walker` in `rect`, sorted by imaginary part then real part.
///
/// `walker` drives the phase tracking; `polisher` (the same function at a
/// tighter accuracy) is used for Newton.
pub fn locate_roots<F, P>(walker: &F, polisher: &P, rect: &Rect, cfg: &EngineConfig) -> Result<Vec<Root>, EngineError>
where
    F: AnalyticFunction,
    P: AnalyticFunction,
{
    let mut last = None;
    for delta in EDGE_PERTURBATIONS {
        let outer = perturb_outward(rect, delta);
        let strip = match StripTrack::build(walker, &outer, cfg) {
            Ok(s) => s,
            Err(e @ EngineError::ContourTooClose { .. }) => {
                last = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let last_index = strip.t.len() - 1;
        let total = strip.count(0, last_index, strip.bottom, strip.top)?;
        let mut roots = strip.subdivide(walker, polisher, cfg, 0, last_index, strip.bottom, strip.top, total)?;
        roots.sort_by(|a, b| a.z.im.total_cmp(&b.z.im).then(a.z.re.total_cmp(&b.z.re)));
        let found: u64 = roots.iter().map(|r| r.multiplicity as u64).sum();
        if found != total {
            return Err(EngineError::CountMismatch { t_low: outer.t0, t_high: outer.t1, expected: total, found });
        }
        return Ok(roots);
    }
    Err(last.expect("perturbations attempted"))
}

/// Phase history along both vertical edges of a strip on a shared t-grid,
/// plus the horizontal phases of its bottom and top edges.
struct StripTrack {
    sigma0: f64,
    sigma1: f64,
    t: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    bottom: f64,
    top: f64,
}

impl StripTrack {
    fn build<F: AnalyticFunction>(f: &F, rect: &Rect, cfg: &EngineConfig) -> Result<Self, EngineError> {
        use rayon::prelude::*;

        let height = rect.height();
        let chunks = (height / cfg.chunk_length).ceil().max(1.0) as usize;
        let edges: Vec<f64> = (0..=chunks)
            .map(|i| if i == chunks { rect.t1 } else { rect.t0 + height * i as f64 / chunks as f64 })
            .collect();
        let pieces: Vec<_> = (0..chunks)
            .into_par_iter()
            .map(|i| {
                let starts = [Complex64::new(rect.sigma0, edges[i]), Complex64::new(rect.sigma1, edges[i])];
                walk_lines(f, &starts, Complex64::new(0.0, 1.0), edges[i + 1] - edges[i], &cfg.walk, true)
            })
            .collect::<Result<_, _>>()?;

        let mut t = vec![rect.t0];
        let mut left = vec![0.0];
        let mut right = vec![0.0];
        for (i, piece) in pieces.iter().enumerate() {
            let (l0, r0) = (*left.last().unwrap(), *right.last().unwrap());
            for j in 1..piece.params.len() {
                t.push(if i + 1 == chunks && j + 1 == piece.params.len() { rect.t1 } else { edges[i] + piece.params[j] });
                left.push(l0 + piece.phases[0][j]);
                right.push(r0 + piece.phases[1][j]);
            }
        }
        let bottom = segment_phase(f, Complex64::new(rect.sigma0, rect.t0), Complex64::new(rect.sigma1, rect.t0), &cfg.walk)?;
        let top = segment_phase(f, Complex64::new(rect.sigma0, rect.t1), Complex64::new(rect.sigma1, rect.t1), &cfg.walk)?;
        Ok(StripTrack { sigma0: rect.sigma0, sigma1: rect.sigma1, t, left, right, bottom, top })
    }

    /// Winding number of the sub-strip between samples `i < j` given the
    /// left-to-right phases of its bottom and top edges.
    fn count(&self, i: usize, j: usize, h_i: f64, h_j: f64) -> Result<u64, EngineError> {
        let total = (self.right[j] - self.right[i]) - (self.left[j] - self.left[i]) + h_i - h_j;
        turns_to_count(total / (2.0 * PI))
    }

    #[allow(clippy::too_many_arguments)]
    fn subdivide<F, P>(
        &self,
        walker: &F,
        polisher: &P,
        cfg: &EngineConfig,
        i: usize,
        j: usize,
        h_i: f64,
        h_j: f64,
        count: u64,
    ) -> Result<Vec<Root>, EngineError>
    where
        F: AnalyticFunction,
        P: AnalyticFunction,
    {
        if count == 0 {
            return Ok(Vec::new());
        }
        let rect = Rect::new(self.sigma0, self.sigma1, self.t[i], self.t[j]);
        if count == 1 || j - i < 2 {
            return resolve_box(walker, polisher, &rect, count, cfg, 0);
        }
        let mid = 0.5 * (self.t[i] + self.t[j]);
        let mut candidates: Vec<usize> = (i + 1..j).collect();
        candidates.sort_by(|&a, &b| (self.t[a] - mid).abs().total_cmp(&(self.t[b] - mid).abs()));
        for &k in candidates.iter().take(8) {
            let a = Complex64::new(self.sigma0, self.t[k]);
            let b = Complex64::new(self.sigma1, self.t[k]);
            let h_k = match segment_phase(walker, a, b, &cfg.walk) {
                Ok(h) => h,
                Err(EngineError::ContourTooClose { .. }) => continue,
                Err(e) => return Err(e),
            };
            let lower = self.count(i, k, h_i, h_k)?;
            if lower > count {
                return Err(EngineError::CountMismatch { t_low: self.t[i], t_high: self.t[k], expected: count, found: lower });
            }
            let (low, high) = rayon::join(
                || self.subdivide(walker, polisher, cfg, i, k, h_i, h_k, lower),
                || self.subdivide(walker, polisher, cfg, k, j, h_k, h_j, count - lower),
            );
            let mut roots = low?;
            roots.extend(high?);
            return Ok(roots);
        }
        resolve_box(walker, polisher, &rect, count, cfg, 0)
    }
}

/// Newton seeds for a box known to hold one root.
fn seeds(rect: &Rect) -> Vec<Complex64> {
    let t = 0.5 * (rect.t0 + rect.t1);
    let mut out = Vec::new();
    for sigma in [0.5, 1.0, 0.0, 1.5, 2.5, -1.0, 4.0] {
        if rect.sigma0 < sigma && sigma < rect.sigma1 {
            out.push(Complex64::new(sigma, t));
        }
    }
    out.push(rect.center());
    out
}

fn resolve_box<F, P>(walker: &F, polisher: &P, rect: &Rect, count: u64, cfg: &EngineConfig, depth: usize) -> Result<Vec<Root>, EngineError>
where
    F: AnalyticFunction,
    P: AnalyticFunction,
{
    if count == 0 {
        return Ok(Vec::new());
    }
    let escape = 4.0 * rect.width().max(rect.height()) + 1.0;
    if count == 1 {
        for seed in seeds(rect) {
            if let Ok(root) = newton(polisher, seed, 1, escape) {
                if rect.contains(root.z) {
                    return Ok(vec![root]);
                }
            }
        }
    }
    let mismatch = |found| EngineError::CountMismatch { t_low: rect.t0, t_high: rect.t1, expected: count, found };
    if rect.width().max(rect.height()) < TINY_BOX {
        let root = newton(polisher, rect.center(), count as u32, escape).map_err(|_| mismatch(0))?;
        return if rect.contains(root.z) { Ok(vec![root]) } else { Err(mismatch(0)) };
    }
    if depth >= MAX_BOX_DEPTH {
        return Err(mismatch(0));
    }
    for frac in SPLIT_FRACTIONS {
        let (first, second) = if rect.width() >= rect.height() {
            let cut = rect.sigma0 + frac * rect.width();
            (Rect::new(rect.sigma0, cut, rect.t0, rect.t1), Rect::new(cut, rect.sigma1, rect.t0, rect.t1))
        } else {
            let cut = rect.t0 + frac * rect.height();
            (Rect::new(rect.sigma0, rect.sigma1, rect.t0, cut), Rect::new(rect.sigma0, rect.sigma1, cut, rect.t1))
        };
        let inner = match winding_number(walker, &first, &cfg.walk) {
            Ok(n) => n,
            Err(EngineError::ContourTooClose { .. }) => continue,
            Err(e) => return Err(e),
        };
        if inner > count {
            return Err(mismatch(inner));
        }
        let mut roots = resolve_box(walker, polisher, &first, inner, cfg, depth + 1)?;
        roots.extend(resolve_box(walker, polisher, &second, count - inner, cfg, depth + 1)?);
        return Ok(roots);
    }
    let c = rect.center();
    Err(EngineError::ContourTooClose { re: c.re, im: c.im })
}

/// Newton polish with multiplicity detection.
///
/// When the derivative vanishes at an iterate, the winding number of g
/// around shrinking squares centred there is taken as the multiplicity and
/// the modified iteration `z -= m g/g'` finishes the job.
pub fn refine_root<F: AnalyticFunction>(f: &F, seed: Complex64, cfg: &EngineConfig) -> Result<Root, EngineError> {
    match newton(f, seed, 1, 10.0) {
        Err(EngineError::DerivativeVanishes { re, im }) => {
            let z = Complex64::new(re, im);
            let mut multiplicity = None;
            for r in [1e-3, 1e-4, 1e-5] {
                let opts = WalkOptions { max_step: r, min_distance: 0.0, ..cfg.walk };
                if let Ok(m) = winding_number(f, &Rect::around(z, r), &opts) {
                    if m >= 1 {
                        multiplicity = Some(m as u32);
                        break;
                    }
                }
            }
            let m = multiplicity.ok_or(EngineError::NoConvergence { re, im })?;
            newton(f, z, m, 10.0)
        }
        other => other,
    }
}

fn newton<F: AnalyticFunction>(f: &F, seed: Complex64, multiplicity: u32, escape: f64) -> Result<Root, EngineError> {
    let no_convergence = || EngineError::NoConvergence { re: seed.re, im: seed.im };
    let m = multiplicity as f64;
    let mut z = seed;
    let mut converged = false;
    for _ in 0..NEWTON_ITERATIONS {
        let (g, dg) = f.eval(z)?;
        if g.norm() == 0.0 {
            converged = true;
            break;
        }
        if dg.norm() < DERIVATIVE_FLOOR {
            if multiplicity > 1 && g.norm() <= MAX_RESIDUAL * 1e-3 {
                converged = true;
                break;
            }
            return Err(EngineError::DerivativeVanishes { re: z.re, im: z.im });
        }
        let step = g / dg * m;
        if !step.re.is_finite() || !step.im.is_finite() || step.norm() > escape || (z - seed).norm() > escape {
            return Err(no_convergence());
        }
        z -= step;
        if step.norm() <= 1e-12 * z.norm().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(no_convergence());
    }
    let residual = f.eval(z)?.0.norm();
    if residual > MAX_RESIDUAL {
        return Err(no_convergence());
    }
    Ok(Root { z, residual, multiplicity })
}
