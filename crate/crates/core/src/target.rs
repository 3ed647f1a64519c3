use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Highest derivative order accepted anywhere in the public API.
pub const MAX_K: u32 = 4;

#[derive(Debug, Error, PartialEq)]
pub enum TargetError {
    #[error("derivative order k={0} exceeds the supported maximum {MAX_K}")]
    OrderTooLarge(u32),
    #[error("target value a must be finite")]
    NonFinite,
    #[error("cannot parse complex value {0:?}; expected \"re\" or \"re+imi\"")]
    Parse(String),
}

/// The equation ζ^(k)(s) = a.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetSpec {
    a: Complex64,
    k: u32,
}

impl TargetSpec {
    pub fn new(a: Complex64, k: u32) -> Result<Self, TargetError> {
        if k > MAX_K {
            return Err(TargetError::OrderTooLarge(k));
        }
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(TargetError::NonFinite);
        }
        Ok(TargetSpec { a, k })
    }

    /// Shorthand for a real target value.
    pub fn real(a: f64, k: u32) -> Result<Self, TargetError> {
        Self::new(Complex64::new(a, 0.0), k)
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Total order used by cache files: (k, Re a, Im a).
    pub fn sort_key(&self) -> (u32, f64, f64) {
        (self.k, self.a.re, self.a.im)
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "zeta^({})(s) = {}", self.k, format_complex(self.a))
    }
}

/// Formats a complex number in the same token syntax accepted by [`parse_complex`].
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `"re"`, `"re+imi"`, `"re-imi"` or `"imi"`; whitespace is not allowed.
pub fn parse_complex(text: &str) -> Result<Complex64, TargetError> {
    let err = || TargetError::Parse(text.to_string());
    if text.is_empty() || text.chars().any(char::is_whitespace) {
        return Err(err());
    }
    let Some(body) = text.strip_suffix(['i', 'I']) else {
        let re: f64 = text.parse().map_err(|_| err())?;
        return finite(Complex64::new(re, 0.0)).ok_or_else(err);
    };
    // split at the last sign that is not an exponent sign and not leading
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => {
            let re: f64 = body[..i].parse().map_err(|_| err())?;
            let im_text = &body[i..];
            let im = match im_text {
                "+" => 1.0,
                "-" => -1.0,
                t => t.parse().map_err(|_| err())?,
            };
            (re, im)
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                t => t.parse().map_err(|_| err())?,
            };
            (0.0, im)
        }
    };
    finite(Complex64::new(re, im)).ok_or_else(err)
}

fn finite(z: Complex64) -> Option<Complex64> {
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

impl FromStr for TargetSpec {
    type Err = TargetError;

    /// `"k:a"`, e.g. `"1:0"` or `"0:0.5+0.5i"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (k, a) = s.split_once(':').ok_or_else(|| TargetError::Parse(s.to_string()))?;
        let k: u32 = k.parse().map_err(|_| TargetError::Parse(s.to_string()))?;
        TargetSpec::new(parse_complex(a)?, k)
    }
}

#[derive(Serialize, Deserialize)]
struct TargetRepr {
    k: u32,
    a_re: f64,
    a_im: f64,
}

impl Serialize for TargetSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TargetRepr { k: self.k, a_re: self.a.re, a_im: self.a.im }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TargetSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = TargetRepr::deserialize(deserializer)?;
        TargetSpec::new(Complex64::new(repr.a_re, repr.a_im), repr.k).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_tokens() {
        assert_eq!(parse_complex("0").unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(parse_complex("-0.5").unwrap(), Complex64::new(-0.5, 0.0));
        assert_eq!(parse_complex("0.5+0.5i").unwrap(), Complex64::new(0.5, 0.5));
        assert_eq!(parse_complex("1+0i").unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(parse_complex("2-3i").unwrap(), Complex64::new(2.0, -3.0));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), Complex64::new(1e-3, 20.0));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("-2.5i").unwrap(), Complex64::new(0.0, -2.5));
    }

    #[test]
    fn rejects_malformed_complex() {
        for bad in ["", "1 + 2i", "abc", "1+2j", "nan", "inf", "1+xi"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn format_round_trips() {
        for z in [Complex64::new(0.5, -0.25), Complex64::new(1.0, 0.0), Complex64::new(-3.0, 2.0)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn order_cap() {
        assert!(TargetSpec::real(0.0, 4).is_ok());
        assert_eq!(TargetSpec::real(0.0, 5), Err(TargetError::OrderTooLarge(5)));
        assert_eq!(TargetSpec::real(f64::NAN, 0), Err(TargetError::NonFinite));
    }

    #[test]
    fn json_shape() {
        let t = TargetSpec::new(Complex64::new(1.0, -0.5), 2).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"k":2,"a_re":1.0,"a_im":-0.5}"#);
        let back: TargetSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
