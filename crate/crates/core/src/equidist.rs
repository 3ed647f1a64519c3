//! Weyl sums and star discrepancy of sequences modulo one.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::ComplexAccumulator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquidistError {
    #[error("prefix size {n} must lie in 1..={len}")]
    EmptyPrefix { n: usize, len: usize },
    #[error("frequency h must be nonzero")]
    ZeroFrequency,
    #[error("prefix sizes must be strictly ascending")]
    PrefixesNotAscending,
    #[error("sequence value {0} is not finite")]
    NonFinite(f64),
}

/// Values reduced into [0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModOneSequence {
    values: Vec<f64>,
    source_label: String,
}

/// `x mod 1` in [0, 1); a result that rounds up to 1 is mapped to 0.
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl ModOneSequence {
    /// Reduces arbitrary reals modulo one.
    pub fn new(raw: impl IntoIterator<Item = f64>, source_label: impl Into<String>) -> Result<Self, EquidistError> {
        let values = raw
            .into_iter()
            .map(|x| if x.is_finite() { Ok(frac(x)) } else { Err(EquidistError::NonFinite(x)) })
            .collect::<Result<_, _>>()?;
        Ok(ModOneSequence { values, source_label: source_label.into() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_prefix(&self, n: usize) -> Result<(), EquidistError> {
        if n == 0 || n > self.values.len() {
            return Err(EquidistError::EmptyPrefix { n, len: self.values.len() });
        }
        Ok(())
    }
}

/// `e^{2πi h x}` with `h·x` reduced modulo one before the exponential.
fn unit(h: i64, x: f64) -> (f64, f64) {
    let hf = h as f64;
    let p = hf * x;
    let err = hf.mul_add(x, -p);
    let angle = TAU * (frac(p) + err);
    let (s, c) = angle.sin_cos();
    (c, s)
}

/// `(1/N) Σ_{j<N} e^{2πi h x_j}`.
pub fn weyl_sum(seq: &ModOneSequence, h: i64, n: usize) -> Result<Complex64, EquidistError> {
    if h == 0 {
        return Err(EquidistError::ZeroFrequency);
    }
    seq.check_prefix(n)?;
    let mut acc = ComplexAccumulator::default();
    for &x in &seq.values[..n] {
        let (re, im) = unit(h, x);
        acc.add(re, im);
    }
    let (re, im) = acc.value();
    Ok(Complex64::new(re, im) / n as f64)
}

/// Exact `D*_N` of the first `n` values.
pub fn star_discrepancy(seq: &ModOneSequence, n: usize) -> Result<f64, EquidistError> {
    seq.check_prefix(n)?;
    let mut sorted = seq.values[..n].to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / nf - x).max(x - i as f64 / nf))
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub source_label: String,
    pub frequencies: Vec<i64>,
    pub prefixes: Vec<usize>,
    /// `magnitudes[i][j] = |S_{h_i}(N_j)|`.
    pub magnitudes: Vec<Vec<f64>>,
    pub discrepancies: Vec<f64>,
}

impl WeylReport {
    /// One row per (h, N): `h,N,magnitude,discrepancy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,N,magnitude,discrepancy\n");
        for (i, h) in self.frequencies.iter().enumerate() {
            for (j, n) in self.prefixes.iter().enumerate() {
                out.push_str(&format!("{h},{n},{},{}\n", self.magnitudes[i][j], self.discrepancies[j]));
            }
        }
        out
    }
}

/// |S_h(N)| and D*_N along ascending prefixes.
pub fn trend_report(seq: &ModOneSequence, hs: &[i64], prefixes: &[usize]) -> Result<WeylReport, EquidistError> {
    if hs.contains(&0) {
        return Err(EquidistError::ZeroFrequency);
    }
    if prefixes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EquidistError::PrefixesNotAscending);
    }
    for &n in prefixes {
        seq.check_prefix(n)?;
    }
    let magnitudes = hs
        .par_iter()
        .map(|&h| {
            // one pass per h; prefixes are ascending
            let mut acc = ComplexAccumulator::default();
            let mut row = Vec::with_capacity(prefixes.len());
            let mut done = 0;
            for &n in prefixes {
                for &x in &seq.values[done..n] {
                    let (re, im) = unit(h, x);
                    acc.add(re, im);
                }
                done = n;
                let (re, im) = acc.value();
                row.push((Complex64::new(re, im) / n as f64).norm().min(1.0));
            }
            row
        })
        .collect();
    let discrepancies = prefixes.par_iter().map(|&n| star_discrepancy(seq, n)).collect::<Result<_, _>>()?;
    Ok(WeylReport {
        source_label: seq.source_label.clone(),
        frequencies: hs.to_vec(),
        prefixes: prefixes.to_vec(),
        magnitudes,
        discrepancies,
    })
}

/// 100, 200, 400, ... up to `len`, followed by `len` itself.
pub fn default_prefixes(len: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 100;
    while n < len {
        out.push(n);
        n *= 2;
    }
    if len > 0 {
        out.push(len);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(values: Vec<f64>) -> ModOneSequence {
        ModOneSequence::new(values, "test").unwrap()
    }

    #[test]
    fn weyl_trivial_cases() {
        let zeros = seq(vec![0.0; 7]);
        assert_eq!(weyl_sum(&zeros, 3, 7).unwrap(), Complex64::new(1.0, 0.0));
        let half = seq(vec![0.0, 0.5]);
        assert!(weyl_sum(&half, 1, 2).unwrap().norm() < 1e-16);
        let n = 50;
        let grid = seq((0..n).map(|j| j as f64 / n as f64).collect());
        assert!(weyl_sum(&grid, 1, n).unwrap().norm() < 1e-12);
        assert!((weyl_sum(&grid, n as i64, n).unwrap() - 1.0).norm() < 1e-12);
        assert_eq!(weyl_sum(&grid, 0, n), Err(EquidistError::ZeroFrequency));
        assert!(weyl_sum(&grid, 1, 0).is_err());
        assert!(weyl_sum(&grid, 1, n + 1).is_err());
    }

    #[test]
    fn discrepancy_trivial_cases() {
        let n = 40;
        let centered = seq((1..=n).map(|j| (2 * j - 1) as f64 / (2 * n) as f64).collect());
        assert!((star_discrepancy(&centered, n).unwrap() - 0.5 / n as f64).abs() < 1e-15);
        assert_eq!(star_discrepancy(&seq(vec![0.5]), 1).unwrap(), 0.5);
    }

    #[test]
    fn reduction_clamps_to_unit_interval() {
        let s = seq(vec![-1e-18, 3.25, -0.75, 2.0]);
        assert!(s.values().iter().all(|&x| (0.0..1.0).contains(&x)));
        assert_eq!(s.values()[1], 0.25);
        assert!(ModOneSequence::new([f64::NAN], "x").is_err());
    }

    #[test]
    fn report_shape_and_errors() {
        let s = seq((0..300).map(|j| (j as f64 * 0.618_033_988_749_895).fract()).collect());
        let r = trend_report(&s, &[1, -2], &[1, 100, 300]).unwrap();
        assert_eq!(r.magnitudes.len(), 2);
        assert_eq!(r.magnitudes[0][0], 1.0);
        assert_eq!(r.discrepancies.len(), 3);
        assert!(trend_report(&s, &[1], &[100, 100]).is_err());
        assert!(trend_report(&s, &[0], &[100]).is_err());
        assert_eq!(r.to_csv().lines().count(), 7);
        assert_eq!(default_prefixes(1517), vec![100, 200, 400, 800, 1517]);
        assert_eq!(default_prefixes(400), vec![100, 200, 400]);
    }
}
