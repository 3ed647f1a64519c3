//! Test functions f with closed-form first and second derivatives.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::zeta::{eval_jet, ComplexPoint, ZetaError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("f is evaluated only for t > e, got t = {0}")]
    DomainError(f64),
    #[error("invalid family parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot parse family {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("derivative order {0} is not one of 0, 1, 2")]
    InvalidOrder(u8),
    #[error("amplitude u must be nonzero")]
    ZeroAmplitude,
    #[error("zeta evaluation failed: {0}")]
    Zeta(#[from] ZetaError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilyKind {
    /// `u t^v (log t)^w`
    PowerLog { u: f64, v: f64, w: f64 },
    /// `u (log t)^v (log log t)^w`
    LogPowLogLog { u: f64, v: f64, w: f64 },
    /// `u t^v ζ(t)` on the real axis
    PowerTimesZeta { u: f64, v: f64 },
    /// `alpha t`
    LinearPhase { alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionFamily {
    kind: FamilyKind,
}

fn finite(name: &str, x: f64) -> Result<f64, FamilyError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(FamilyError::InvalidParameter(format!("{name} must be finite")))
    }
}

impl FunctionFamily {
    pub fn new(kind: FamilyKind) -> Result<Self, FamilyError> {
        match kind {
            FamilyKind::PowerLog { u, v, w } | FamilyKind::LogPowLogLog { u, v, w } => {
                finite("u", u)?;
                finite("v", v)?;
                finite("w", w)?;
                if u == 0.0 {
                    return Err(FamilyError::ZeroAmplitude);
                }
            }
            FamilyKind::PowerTimesZeta { u, v } => {
                finite("u", u)?;
                finite("v", v)?;
                if u == 0.0 {
                    return Err(FamilyError::ZeroAmplitude);
                }
                if !(0.0 < v && v < 1.0) {
                    return Err(FamilyError::InvalidParameter(format!("powzeta needs 0 < v < 1, got v = {v}")));
                }
            }
            FamilyKind::LinearPhase { alpha } => {
                finite("alpha", alpha)?;
                if alpha == 0.0 {
                    return Err(FamilyError::InvalidParameter("alpha must be nonzero".into()));
                }
            }
        }
        Ok(FunctionFamily { kind })
    }

    pub fn power_log(u: f64, v: f64, w: f64) -> Result<Self, FamilyError> {
        Self::new(FamilyKind::PowerLog { u, v, w })
    }

    pub fn log_pow_log_log(u: f64, v: f64, w: f64) -> Result<Self, FamilyError> {
        Self::new(FamilyKind::LogPowLogLog { u, v, w })
    }

    pub fn power_times_zeta(u: f64, v: f64) -> Result<Self, FamilyError> {
        Self::new(FamilyKind::PowerTimesZeta { u, v })
    }

    pub fn linear(alpha: f64) -> Result<Self, FamilyError> {
        Self::new(FamilyKind::LinearPhase { alpha })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// The family of `factor · f`.
    pub fn scaled(&self, factor: f64) -> Result<Self, FamilyError> {
        let kind = match self.kind {
            FamilyKind::PowerLog { u, v, w } => FamilyKind::PowerLog { u: u * factor, v, w },
            FamilyKind::LogPowLogLog { u, v, w } => FamilyKind::LogPowLogLog { u: u * factor, v, w },
            FamilyKind::PowerTimesZeta { u, v } => FamilyKind::PowerTimesZeta { u: u * factor, v },
            FamilyKind::LinearPhase { alpha } => FamilyKind::LinearPhase { alpha: alpha * factor },
        };
        Self::new(kind)
    }

    /// `(f(t), f'(t), f''(t))`.
    pub fn derivatives(&self, t: f64) -> Result<[f64; 3], FamilyError> {
        if !(t > E) || !t.is_finite() {
            return Err(FamilyError::DomainError(t));
        }
        let l = t.ln();
        Ok(match self.kind {
            FamilyKind::PowerLog { u, v, w } => {
                let base = u * t.powf(v) * l.powf(w);
                let d1 = u * t.powf(v - 1.0) * l.powf(w - 1.0) * (v * l + w);
                let d2 = u
                    * t.powf(v - 2.0)
                    * l.powf(w - 2.0)
                    * ((2.0 * v - 1.0) * w * l + (v - 1.0) * v * l * l + (w - 1.0) * w);
                [base, d1, d2]
            }
            FamilyKind::LogPowLogLog { u, v, w } => {
                let m = l.ln();
                let base = u * l.powf(v) * m.powf(w);
                let d1 = u * l.powf(v - 1.0) * m.powf(w - 1.0) * (v * m + w) / t;
                let d2 = u * l.powf(v - 2.0) * m.powf(w - 2.0) / (t * t)
                    * (w * (2.0 * v - l - 1.0) * m + v * (v - l - 1.0) * m * m + (w - 1.0) * w);
                [base, d1, d2]
            }
            FamilyKind::PowerTimesZeta { u, v } => {
                let [z0, z1, z2] = real_zeta_jet(t)?;
                let p = t.powf(v);
                let base = u * p * z0;
                let d1 = u * v * p / t * z0 + u * p * z1;
                let d2 = u * v * (v - 1.0) * p / (t * t) * z0 + 2.0 * u * v * p / t * z1 + u * p * z2;
                [base, d1, d2]
            }
            FamilyKind::LinearPhase { alpha } => [alpha * t, alpha, 0.0],
        })
    }

    /// f, f' or f'' at `t > e`.
    pub fn eval_f(&self, t: f64, order: u8) -> Result<f64, FamilyError> {
        if order > 2 {
            return Err(FamilyError::InvalidOrder(order));
        }
        Ok(self.derivatives(t)?[order as usize])
    }

    fn tag(&self) -> &'static str {
        match self.kind {
            FamilyKind::PowerLog { .. } => "powerlog",
            FamilyKind::LogPowLogLog { .. } => "loglog",
            FamilyKind::PowerTimesZeta { .. } => "powzeta",
            FamilyKind::LinearPhase { .. } => "linear",
        }
    }
}

/// ζ, ζ', ζ'' at a real point.
fn real_zeta_jet(t: f64) -> Result<[f64; 3], FamilyError> {
    let jet = eval_jet(ComplexPoint::new(t, 0.0)?, 2, 1e-13)?;
    Ok([jet[0].value.re, jet[1].value.re, jet[2].value.re])
}

impl fmt::Display for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FamilyKind::PowerLog { u, v, w } | FamilyKind::LogPowLogLog { u, v, w } => {
                write!(f, "{}:u={u},v={v},w={w}", self.tag())
            }
            FamilyKind::PowerTimesZeta { u, v } => write!(f, "{}:u={u},v={v}", self.tag()),
            FamilyKind::LinearPhase { alpha } => write!(f, "{}:alpha={alpha}", self.tag()),
        }
    }
}

impl FromStr for FunctionFamily {
    type Err = FamilyError;

    /// `"powerlog:u=1,v=0.5,w=0"`, `"loglog:u=1,v=2,w=0"`, `"powzeta:u=1,v=0.5"`
    /// or `"linear:alpha=1.0"`, case-insensitive.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let fail = |reason: String| FamilyError::Parse { text: text.to_string(), reason };
        let lower = text.trim().to_ascii_lowercase();
        let (tag, body) = lower.split_once(':').ok_or_else(|| fail("missing ':'".into()))?;
        let mut params = BTreeMap::new();
        for item in body.split(',') {
            let (key, value) = item.split_once('=').ok_or_else(|| fail(format!("expected key=value, got {item:?}")))?;
            let value: f64 = value.trim().parse().map_err(|_| fail(format!("bad number {value:?}")))?;
            if params.insert(key.trim().to_string(), value).is_some() {
                return Err(fail(format!("duplicate key {key:?}")));
            }
        }
        let keys: &[&str] = match tag.trim() {
            "powerlog" | "loglog" => &["u", "v", "w"],
            "powzeta" => &["u", "v"],
            "linear" => &["alpha"],
            other => return Err(fail(format!("unknown family {other:?}"))),
        };
        if params.len() != keys.len() || keys.iter().any(|k| !params.contains_key(*k)) {
            return Err(fail(format!("expected exactly the keys {}", keys.join(","))));
        }
        let p = |k: &str| params[k];
        match tag.trim() {
            "powerlog" => Self::power_log(p("u"), p("v"), p("w")),
            "loglog" => Self::log_pow_log_log(p("u"), p("v"), p("w")),
            "powzeta" => Self::power_times_zeta(p("u"), p("v")),
            _ => Self::linear(p("alpha")),
        }
    }
}

impl Serialize for FunctionFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FunctionFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `e^{i f(t)}`.
pub fn phase_factor(family: &FunctionFamily, t: f64) -> Result<Complex64, FamilyError> {
    Ok(Complex64::from_polar(1.0, family.eval_f(t, 0)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        let f = FunctionFamily::power_log(1.0, 1.0, 0.0).unwrap();
        assert!((f.eval_f(10.0, 1).unwrap() - 1.0).abs() < 1e-15);
        let f = FunctionFamily::power_log(1.0, 0.0, 2.0).unwrap();
        assert!((f.eval_f(E * E, 0).unwrap() - 4.0).abs() < 1e-14);
        let f = FunctionFamily::linear(2.5).unwrap();
        assert_eq!(f.derivatives(5.0).unwrap(), [12.5, 2.5, 0.0]);
    }

    #[test]
    fn domain_and_validation() {
        let f = FunctionFamily::power_log(1.0, 0.5, 0.0).unwrap();
        assert_eq!(f.eval_f(E, 0), Err(FamilyError::DomainError(E)));
        assert_eq!(f.eval_f(10.0, 3), Err(FamilyError::InvalidOrder(3)));
        assert_eq!(FunctionFamily::power_log(0.0, 0.5, 0.0), Err(FamilyError::ZeroAmplitude));
        assert!(FunctionFamily::power_times_zeta(1.0, 1.0).is_err());
        assert!(FunctionFamily::linear(0.0).is_err());
    }

    #[test]
    fn parse_and_display() {
        let f: FunctionFamily = "PowerLog:U=1,v=0.5,w=0".parse().unwrap();
        assert_eq!(f, FunctionFamily::power_log(1.0, 0.5, 0.0).unwrap());
        assert_eq!(f.to_string(), "powerlog:u=1,v=0.5,w=0");
        for text in ["loglog:u=1,v=2,w=0", "powzeta:u=1,v=0.5", "linear:alpha=1"] {
            let f: FunctionFamily = text.parse().unwrap();
            assert_eq!(f.to_string(), text);
        }
        for bad in ["linear:alpha=0", "powerlog:u=1,v=0.5", "powerlog:u=1,v=0.5,w=0,x=1", "sine:a=1", "powerlog", "linear:alpha=x"] {
            assert!(bad.parse::<FunctionFamily>().is_err(), "{bad}");
        }
    }

    #[test]
    fn scaling_multiplies_f() {
        let f = FunctionFamily::log_pow_log_log(1.5, 2.0, 1.0).unwrap();
        let g = f.scaled(3.0).unwrap();
        let (a, b) = (f.derivatives(50.0).unwrap(), g.derivatives(50.0).unwrap());
        for i in 0..3 {
            assert!((b[i] - 3.0 * a[i]).abs() <= 1e-14 * b[i].abs());
        }
    }
}
