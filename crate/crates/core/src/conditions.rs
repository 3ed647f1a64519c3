//! Admissibility of test functions: symbolic for the power-log family,
//! sampled for everything else.
//!
//! Asymptotic `o(·)` conditions cannot be decided from finitely many values;
//! they are judged by the trend of a ratio at T, 2T and 4T.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::{FamilyError, FunctionFamily};
use crate::quadrature::{integrate_real, QuadError, QuadOptions};

/// Relative change below which consecutive samples count as equal.
const FLAT: f64 = 1e-12;
/// Smallest relative step that counts as a decrease in a trend test.
const TREND_STEP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConditionError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(#[from] QuadError),
    #[error("invalid check range: {0}")]
    InvalidRange(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerLogClass {
    Admissible,
    Borderline,
    Inadmissible,
}

/// Region in which `u t^v (log t)^w` satisfies every condition.
pub fn classify_power_log(u: f64, v: f64, w: f64) -> Result<PowerLogClass, FamilyError> {
    if u == 0.0 {
        return Err(FamilyError::ZeroAmplitude);
    }
    let admissible = (0.0 < v && v < 1.0) || (v == 0.0 && w > 1.0) || (v == 1.0 && w < 0.0);
    Ok(if admissible {
        PowerLogClass::Admissible
    } else if v == 1.0 && w == 0.0 {
        PowerLogClass::Borderline
    } else {
        PowerLogClass::Inadmissible
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionId {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    #[serde(rename = "C6prime")]
    C6Prime,
}

impl ConditionId {
    pub const ALL: [ConditionId; 7] =
        [ConditionId::C1, ConditionId::C2, ConditionId::C3, ConditionId::C4, ConditionId::C5, ConditionId::C6, ConditionId::C6Prime];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub c_used: f64,
    pub verdicts: BTreeMap<ConditionId, Verdict>,
    /// Where the first failing check was observed.
    pub witness: Option<f64>,
}

impl ConditionReport {
    pub fn verdict(&self, id: ConditionId) -> Verdict {
        self.verdicts[&id]
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.values().all(|v| *v == Verdict::Holds)
    }
}

pub fn check_conditions(family: &FunctionFamily, c: f64, t: f64, grid_size: usize) -> Result<ConditionReport, ConditionError> {
    check_conditions_with(family, c, t, grid_size, 1)
}

/// As [`check_conditions`], with the `n` of `log(t/(2nπ))` in (C3) given explicitly.
pub fn check_conditions_with(
    family: &FunctionFamily,
    c: f64,
    t: f64,
    grid_size: usize,
    n_ak: u32,
) -> Result<ConditionReport, ConditionError> {
    if !(c > E) || !c.is_finite() {
        return Err(ConditionError::InvalidRange(format!("need c > e, got {c}")));
    }
    if !(t > 2.0 * c) || !t.is_finite() {
        return Err(ConditionError::InvalidRange(format!("need T > 2c, got T = {t}, c = {c}")));
    }
    if grid_size < 100 {
        return Err(ConditionError::InvalidRange(format!("grid size {grid_size} is below 100")));
    }
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| if i + 1 == grid_size { t } else { c * (t / c).powf(i as f64 / (grid_size - 1) as f64) })
        .collect();
    let derivs: Vec<[f64; 3]> = grid.iter().map(|&x| family.derivatives(x)).collect::<Result<_, _>>()?;

    let mut verdicts = BTreeMap::new();
    let mut witness = None;
    let mut record = |id, (verdict, at): (Verdict, Option<f64>)| {
        if verdict == Verdict::Fails && witness.is_none() {
            witness = at;
        }
        verdicts.insert(id, verdict);
    };

    record(ConditionId::C1, (Verdict::Holds, None));

    let c2: Vec<f64> = grid.iter().zip(&derivs).map(|(x, d)| x * d[1] * d[1]).collect();
    record(ConditionId::C2, monotone_single_signed(&grid, &c2));

    let log_shift = (2.0 * n_ak as f64 * PI).ln();
    let c3: Vec<f64> = grid.iter().zip(&derivs).map(|(x, d)| d[1].powi(3) / (d[2] * (x.ln() - log_shift))).collect();
    record(ConditionId::C3, monotone_single_signed(&grid, &c3));

    let scales = [t, 2.0 * t, 4.0 * t];
    let ends: Vec<[f64; 3]> = scales.iter().map(|&x| family.derivatives(x)).collect::<Result<_, _>>()?;
    let c4: Vec<f64> = scales.iter().zip(&ends).map(|(x, d)| (1.0 / d[1]).abs() / x).collect();
    record(ConditionId::C4, trend(&scales, &c4));
    let c5: Vec<f64> = scales.iter().zip(&ends).map(|(x, d)| (d[2] / d[1].powi(3)).abs() / x).collect();
    record(ConditionId::C5, trend(&scales, &c5));

    let integral = |weight: fn(f64) -> f64| -> Result<Vec<f64>, ConditionError> {
        let integrand = |x: f64| {
            family.eval_f(x, 1).map(|d| d.abs() * weight(x)).map_err(|e| QuadError::Integrand { x, message: e.to_string() })
        };
        let mut total = 0.0;
        let mut out = Vec::new();
        let mut from = c;
        for &x in &scales {
            let scale = integrand(x)?.abs() * x + integrand(from)?.abs() * from;
            let opts = QuadOptions { tolerance: 1e-10 * scale.max(f64::MIN_POSITIVE) };
            total += integrate_real(&integrand, from, x, &opts)?;
            out.push(total / (x * x.ln()));
            from = x;
        }
        Ok(out)
    };
    record(ConditionId::C6, trend(&scales, &integral(f64::ln)?));
    record(ConditionId::C6Prime, trend(&scales, &integral(|x| x.ln() / x.ln().ln().sqrt())?));

    Ok(ConditionReport { c_used: c, verdicts, witness })
}

/// Sign-constancy and monotonicity of sampled values, with a failure witness.
fn monotone_single_signed(grid: &[f64], values: &[f64]) -> (Verdict, Option<f64>) {
    let first_sign = values[0].signum();
    for (x, v) in grid.iter().zip(values) {
        if !v.is_finite() || *v == 0.0 || v.signum() != first_sign {
            return (Verdict::Fails, Some(*x));
        }
    }
    let mut direction = 0.0;
    for i in 1..values.len() {
        let step = values[i] - values[i - 1];
        if step.abs() <= FLAT * values[i].abs().max(values[i - 1].abs()) {
            continue;
        }
        if direction == 0.0 {
            direction = step.signum();
        } else if step.signum() != direction {
            return (Verdict::Fails, Some(grid[i]));
        }
    }
    (Verdict::Holds, None)
}

/// Decay test on a ratio sampled at T, 2T, 4T.
fn trend(scales: &[f64], ratios: &[f64]) -> (Verdict, Option<f64>) {
    if let Some(i) = ratios.iter().position(|r| !r.is_finite()) {
        return (Verdict::Fails, Some(scales[i]));
    }
    if ratios.iter().all(|r| *r == 0.0) {
        return (Verdict::Holds, None);
    }
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0] * (1.0 - TREND_STEP));
    let non_decreasing = ratios.windows(2).all(|w| w[1] >= w[0] * (1.0 - TREND_STEP));
    if decreasing {
        (Verdict::Holds, None)
    } else if non_decreasing {
        (Verdict::Fails, scales.last().copied())
    } else {
        (Verdict::Indeterminate, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifier_cases() {
        assert_eq!(classify_power_log(1.0, 0.5, 0.0).unwrap(), PowerLogClass::Admissible);
        assert_eq!(classify_power_log(1.0, 0.0, 2.0).unwrap(), PowerLogClass::Admissible);
        assert_eq!(classify_power_log(1.0, 1.0, 0.0).unwrap(), PowerLogClass::Borderline);
        assert_eq!(classify_power_log(1.0, 1.0, 1.0).unwrap(), PowerLogClass::Inadmissible);
        assert_eq!(classify_power_log(-3.0, 1.0, -1.0).unwrap(), PowerLogClass::Admissible);
        assert_eq!(classify_power_log(0.0, 0.5, 0.0), Err(FamilyError::ZeroAmplitude));
    }

    #[test]
    fn trend_classes() {
        let s = [1.0, 2.0, 4.0];
        assert_eq!(trend(&s, &[3.0, 2.0, 1.0]).0, Verdict::Holds);
        assert_eq!(trend(&s, &[1.0, 1.0, 1.0]).0, Verdict::Fails);
        assert_eq!(trend(&s, &[1.0, 2.0, 1.5]).0, Verdict::Indeterminate);
        assert_eq!(trend(&s, &[1.0, f64::INFINITY, 1.0]), (Verdict::Fails, Some(2.0)));
    }

    #[test]
    fn monotone_allows_constant_runs() {
        let g = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(monotone_single_signed(&g, &[0.25, 0.25, 0.25, 0.25]).0, Verdict::Holds);
        assert_eq!(monotone_single_signed(&g, &[1.0, 2.0, 1.5, 3.0]), (Verdict::Fails, Some(3.0)));
        assert_eq!(monotone_single_signed(&g, &[1.0, -2.0, -3.0, -4.0]), (Verdict::Fails, Some(2.0)));
    }

    #[test]
    fn rejects_bad_ranges() {
        let f = FunctionFamily::power_log(1.0, 0.5, 0.0).unwrap();
        assert!(check_conditions(&f, 2.0, 100.0, 200).is_err());
        assert!(check_conditions(&f, 100.0, 150.0, 200).is_err());
        assert!(check_conditions(&f, 100.0, 1000.0, 50).is_err());
    }
}
