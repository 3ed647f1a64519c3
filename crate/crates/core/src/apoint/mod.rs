//! Enumeration of a-points of ζ^(k) inside a vertical strip.
//!
//! Counting is done with the argument principle on rectangles; every
//! reported point is polished by Newton's method and the number of points
//! found in each rectangle must equal its winding number.

mod cache;
mod contour;
mod locate;

use num_complex::Complex64;
use thiserror::Error;

use crate::target::TargetSpec;
use crate::zeta::{eval_jet, ComplexPoint, ZetaError};

pub use cache::{canonical_gamma, format_gamma, write_atomic, ApointCache, CacheError, Coverage};
pub use contour::{winding_number, Rect, WalkOptions};
pub use locate::{
    count_between, count_in_window, locate_apoints, locate_in_window, locate_roots, refine, refine_root, EngineConfig,
    Root,
};

/// Default strip bounds used when none are given.
pub const DEFAULT_SIGMA_MIN: f64 = -2.0;
pub const DEFAULT_SIGMA_MAX: f64 = 6.0;
/// Largest accepted residual |ζ^(k)(ρ) − a| for a reported point.
pub const MAX_RESIDUAL: f64 = 1e-9;
/// Minimum distance between a contour and any enclosed root.
pub const MIN_CONTOUR_DISTANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("contour passes within {MIN_CONTOUR_DISTANCE} of a root near {re}+{im}i after 5 perturbations")]
    ContourTooClose { re: f64, im: f64 },
    #[error("evaluation failed: {0}")]
    EvalFailure(#[from] ZetaError),
    #[error("window t in [{t_low}, {t_high}] has winding number {expected} but {found} roots were refined")]
    CountMismatch { t_low: f64, t_high: f64, expected: u64, found: u64 },
    #[error("Newton iteration from {re}+{im}i did not converge")]
    NoConvergence { re: f64, im: f64 },
    #[error("derivative vanishes at {re}+{im}i")]
    DerivativeVanishes { re: f64, im: f64 },
    #[error("accumulated phase {turns} turns is not within 0.01 of an integer")]
    WindingNotInteger { turns: f64 },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid a-point: {0}")]
    InvalidPoint(String),
}

/// Search rectangle `[sigma_min, sigma_max] × [t_low, t_high]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripWindow {
    sigma_min: f64,
    sigma_max: f64,
    t_low: f64,
    t_high: f64,
}

impl StripWindow {
    pub fn new(sigma_min: f64, sigma_max: f64, t_low: f64, t_high: f64) -> Result<Self, EngineError> {
        let all_finite = [sigma_min, sigma_max, t_low, t_high].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(EngineError::InvalidWindow("non-finite bound".into()));
        }
        if !(sigma_min < sigma_max) {
            return Err(EngineError::InvalidWindow(format!("sigma_min {sigma_min} >= sigma_max {sigma_max}")));
        }
        if !(1.0 < t_low && t_low < t_high) {
            return Err(EngineError::InvalidWindow(format!("need 1 < t_low < t_high, got [{t_low}, {t_high}]")));
        }
        Ok(StripWindow { sigma_min, sigma_max, t_low, t_high })
    }

    /// The default strip between two heights.
    pub fn strip(t_low: f64, t_high: f64) -> Result<Self, EngineError> {
        Self::new(DEFAULT_SIGMA_MIN, DEFAULT_SIGMA_MAX, t_low, t_high)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }
    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }
    pub fn t_low(&self) -> f64 {
        self.t_low
    }
    pub fn t_high(&self) -> f64 {
        self.t_high
    }

    pub(crate) fn rect(&self) -> Rect {
        Rect::new(self.sigma_min, self.sigma_max, self.t_low, self.t_high)
    }
}

/// One solution ρ = β + iγ of ζ^(k)(s) = a.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct APoint {
    beta: f64,
    gamma: f64,
    target: TargetSpec,
    residual: f64,
    multiplicity: u32,
}

impl APoint {
    pub fn new(beta: f64, gamma: f64, target: TargetSpec, residual: f64, multiplicity: u32) -> Result<Self, EngineError> {
        if !beta.is_finite() || !gamma.is_finite() {
            return Err(EngineError::InvalidPoint("non-finite coordinate".into()));
        }
        if !(gamma > 1.0) {
            return Err(EngineError::InvalidPoint(format!("ordinate {gamma} must exceed 1")));
        }
        if !(0.0..=MAX_RESIDUAL).contains(&residual) {
            return Err(EngineError::InvalidPoint(format!("residual {residual:e} outside [0, {MAX_RESIDUAL:e}]")));
        }
        if multiplicity == 0 {
            return Err(EngineError::InvalidPoint("multiplicity must be positive".into()));
        }
        Ok(APoint { beta, gamma, target, residual, multiplicity })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn target(&self) -> TargetSpec {
        self.target
    }
    pub fn residual(&self) -> f64 {
        self.residual
    }
    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }
    pub fn point(&self) -> Complex64 {
        Complex64::new(self.beta, self.gamma)
    }
}

/// An analytic function with its derivative, as seen by the root finder.
pub trait AnalyticFunction: Sync {
    fn eval(&self, s: Complex64) -> Result<(Complex64, Complex64), EngineError>;
}

/// `g(s) = ζ^(k)(s) − a` with `g' = ζ^(k+1)`.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedZeta {
    pub target: TargetSpec,
    pub accuracy: f64,
}

impl ShiftedZeta {
    pub fn new(target: TargetSpec, accuracy: f64) -> Self {
        ShiftedZeta { target, accuracy }
    }
}

impl AnalyticFunction for ShiftedZeta {
    fn eval(&self, s: Complex64) -> Result<(Complex64, Complex64), EngineError> {
        let point = ComplexPoint::try_from(s)?;
        let k = self.target.k() as usize;
        let mut accuracy = self.accuracy;
        loop {
            match eval_jet(point, k + 1, accuracy) {
                Ok(jet) => return Ok((jet[k].value - self.target.a(), jet[k + 1].value)),
                Err(ZetaError::AccuracyNotReached { .. }) if accuracy < 1e-9 => accuracy *= 10.0,
                Err(e) => return Err(e.into()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_invariants() {
        assert!(StripWindow::new(-2.0, 6.0, 2.0, 50.0).is_ok());
        assert!(StripWindow::new(6.0, -2.0, 2.0, 50.0).is_err());
        assert!(StripWindow::new(-2.0, 6.0, 1.0, 50.0).is_err());
        assert!(StripWindow::new(-2.0, 6.0, 50.0, 50.0).is_err());
        assert!(StripWindow::new(-2.0, f64::NAN, 2.0, 50.0).is_err());
    }

    #[test]
    fn apoint_invariants() {
        let t = TargetSpec::real(0.0, 0).unwrap();
        assert!(APoint::new(0.5, 14.1, t, 1e-12, 1).is_ok());
        assert!(APoint::new(0.5, 0.9, t, 1e-12, 1).is_err());
        assert!(APoint::new(0.5, 1.0, t, 1e-12, 1).is_err());
        assert!(APoint::new(0.5, 14.1, t, 1e-8, 1).is_err());
        assert!(APoint::new(0.5, 14.1, t, 1e-12, 0).is_err());
    }
}
