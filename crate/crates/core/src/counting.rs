//! Main term of the a-point counting function and its comparison with
//! enumerated points.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apoint::{ApointCache, CacheError};
use crate::target::TargetSpec;

#[derive(Debug, Error)]
pub enum CountingError {
    #[error(transparent)]
    CacheIncomplete(#[from] CacheError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid counting model: {0}")]
    InvalidModel(String),
}

/// 2 for (a, k) = (1, 0) and for a = 0 with k >= 1; 1 otherwise.
pub fn n_ak(target: &TargetSpec) -> u32 {
    let a = target.a();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    if (a == one && target.k() == 0) || (a == zero && target.k() >= 1) {
        2
    } else {
        1
    }
}

/// `T/2π · (log T − log(2 n π e))`.
pub fn main_term(t: f64, target: &TargetSpec) -> f64 {
    let n = n_ak(target) as f64;
    t / (2.0 * PI) * (t.ln() - (2.0 * n * PI * E).ln())
}

/// Density of the main term, `log(t/(2nπ)) / 2π`.
pub fn main_term_density(t: f64, target: &TargetSpec) -> f64 {
    let n = n_ak(target) as f64;
    (t / (2.0 * n * PI)).ln() / (2.0 * PI)
}

/// Counting functions of the shape `C1·T·(log T − log C2) + O(log T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralCountingModel {
    c1: f64,
    c2: f64,
}

impl GeneralCountingModel {
    pub fn new(c1: f64, c2: f64) -> Result<Self, CountingError> {
        if !c1.is_finite() || c1 == 0.0 {
            return Err(CountingError::InvalidModel(format!("C1 must be finite and nonzero, got {c1}")));
        }
        if !c2.is_finite() || c2 <= 0.0 {
            return Err(CountingError::InvalidModel(format!("C2 must be finite and positive, got {c2}")));
        }
        Ok(GeneralCountingModel { c1, c2 })
    }

    /// The model matching [`main_term`] for `target`.
    pub fn for_target(target: &TargetSpec) -> Self {
        GeneralCountingModel { c1: 1.0 / (2.0 * PI), c2: 2.0 * n_ak(target) as f64 * PI * E }
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }
}

pub fn general_main_term(t: f64, model: &GeneralCountingModel) -> f64 {
    model.c1 * t * (t.ln() - model.c2.ln())
}

/// Comparison envelopes; the log log T variants are absent where log log T <= 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    #[serde(rename = "logT")]
    pub log_t: Vec<f64>,
    #[serde(rename = "logT_over_loglogT")]
    pub log_t_over_loglog_t: Vec<Option<f64>>,
    #[serde(rename = "logT_over_sqrt_loglogT")]
    pub log_t_over_sqrt_loglog_t: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingCurve {
    pub target: TargetSpec,
    pub t_grid: Vec<f64>,
    pub main_term: Vec<f64>,
    pub observed: Vec<u64>,
    pub residual: Vec<f64>,
    pub envelopes: Envelopes,
}

impl CountingCurve {
    /// Largest |residual| / log T over the grid.
    pub fn max_residual_ratio(&self) -> f64 {
        self.residual.iter().zip(&self.t_grid).map(|(r, t)| r.abs() / t.ln()).fold(0.0, f64::max)
    }
}

/// Number of cached points of `target` with γ <= t, with multiplicity.
pub fn observed_count(cache: &ApointCache, target: &TargetSpec, t: f64) -> Result<u64, CountingError> {
    Ok(cache.ordinates(target, 1.0, t)?.iter().map(|&(_, m)| m as u64).sum())
}

pub fn residual_curve(target: &TargetSpec, cache: &ApointCache, t_grid: &[f64]) -> Result<CountingCurve, CountingError> {
    if t_grid.is_empty() {
        return Err(CountingError::InvalidGrid("empty grid".into()));
    }
    if let Some(t) = t_grid.iter().find(|t| !(t.is_finite() && **t > 1.0)) {
        return Err(CountingError::InvalidGrid(format!("grid value {t} must be finite and exceed 1")));
    }
    let t_max = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ordinates = cache.ordinates(target, 1.0, t_max)?;
    let observed: Vec<u64> = t_grid
        .iter()
        .map(|&t| ordinates.iter().filter(|(g, _)| *g <= t).map(|&(_, m)| m as u64).sum())
        .collect();
    let main: Vec<f64> = t_grid.iter().map(|&t| main_term(t, target)).collect();
    let residual = observed.iter().zip(&main).map(|(&o, m)| o as f64 - m).collect();
    let loglog = |t: f64| {
        let ll = t.ln().ln();
        (ll > 0.0).then_some(ll)
    };
    let envelopes = Envelopes {
        log_t: t_grid.iter().map(|t| t.ln()).collect(),
        log_t_over_loglog_t: t_grid.iter().map(|&t| loglog(t).map(|ll| t.ln() / ll)).collect(),
        log_t_over_sqrt_loglog_t: t_grid.iter().map(|&t| loglog(t).map(|ll| t.ln() / ll.sqrt())).collect(),
    };
    Ok(CountingCurve { target: *target, t_grid: t_grid.to_vec(), main_term: main, observed, residual, envelopes })
}
