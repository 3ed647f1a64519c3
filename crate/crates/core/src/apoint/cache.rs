//! CSV persistence of located a-points.
//!
//! Alongside `points.csv` a sidecar `points.csv.meta.json` records which
//! windows were searched exhaustively. Without the sidecar each target is
//! assumed complete up to its largest stored ordinate.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{APoint, StripWindow};
use crate::target::TargetSpec;

const HEADER: [&str; 7] = ["k", "a_re", "a_im", "beta", "gamma", "multiplicity", "residual"];
/// Coverage starting this close to 1 counts as starting at 1.
const LOWER_EDGE_SLACK: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed cache: {0}")]
    Format(String),
    #[error("cache does not cover t in ({t_low}, {t_high}] for {target}")]
    Incomplete { target: TargetSpec, t_low: f64, t_high: f64 },
}

/// One exhaustively searched window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub k: u32,
    pub a_re: f64,
    pub a_im: f64,
    pub t_low: f64,
    pub t_high: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub count: u64,
}

impl Coverage {
    fn is_for(&self, target: &TargetSpec) -> bool {
        self.k == target.k() && self.a_re == target.a().re && self.a_im == target.a().im
    }
}

/// Formats an ordinate with 15 significant digits in positional notation.
pub fn format_gamma(gamma: f64) -> String {
    let sci = format!("{gamma:.14e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let negative = gamma < 0.0;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-exponent - 1) as usize));
        out.push_str(&digits);
    } else if exponent as usize >= digits.len() - 1 {
        out.push_str(&digits);
        out.extend(std::iter::repeat('0').take(exponent as usize + 1 - digits.len()));
    } else {
        let split = exponent as usize + 1;
        out.push_str(&digits[..split]);
        out.push('.');
        out.push_str(&digits[split..]);
    }
    out
}

/// The value an ordinate takes after a trip through the cache file.
pub fn canonical_gamma(gamma: f64) -> f64 {
    if !gamma.is_finite() {
        return gamma;
    }
    format_gamma(gamma).parse().expect("formatted ordinate parses")
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CacheError> {
    let io = |source| CacheError::Io { path: path.to_path_buf(), source };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut file = fs::File::create(&tmp).map_err(io)?;
        file.write_all(bytes).map_err(io)?;
        file.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

/// All stored a-points, sorted by (k, Re a, Im a, γ), plus coverage records.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ApointCache {
    points: Vec<APoint>,
    coverage: Vec<Coverage>,
}

fn point_order(p: &APoint, q: &APoint) -> std::cmp::Ordering {
    let (k1, r1, i1) = p.target().sort_key();
    let (k2, r2, i2) = q.target().sort_key();
    k1.cmp(&k2)
        .then(r1.total_cmp(&r2))
        .then(i1.total_cmp(&i2))
        .then(p.gamma().total_cmp(&q.gamma()))
        .then(p.beta().total_cmp(&q.beta()))
}

impl ApointCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores the complete result of a search over `window`, replacing any
    /// points of the same target inside it.
    pub fn insert_window(&mut self, target: &TargetSpec, window: &StripWindow, points: &[APoint]) {
        let inside = |p: &APoint| {
            p.target() == *target && window.t_low() < p.gamma() && p.gamma() <= window.t_high()
        };
        self.points.retain(|p| !inside(p));
        self.points.extend(points.iter().copied());
        self.points.sort_by(point_order);
        self.coverage.push(Coverage {
            k: target.k(),
            a_re: target.a().re,
            a_im: target.a().im,
            t_low: window.t_low(),
            t_high: window.t_high(),
            sigma_min: window.sigma_min(),
            sigma_max: window.sigma_max(),
            count: points.iter().map(|p| p.multiplicity() as u64).sum(),
        });
        self.coverage.sort_by(|a, b| {
            (a.k, a.a_re, a.a_im, a.t_low).partial_cmp(&(b.k, b.a_re, b.a_im, b.t_low)).expect("finite coverage")
        });
    }

    pub fn points(&self) -> &[APoint] {
        &self.points
    }

    pub fn coverage(&self) -> &[Coverage] {
        &self.coverage
    }

    pub fn targets(&self) -> Vec<TargetSpec> {
        let mut out: Vec<TargetSpec> = Vec::new();
        for p in &self.points {
            if out.last() != Some(&p.target()) {
                out.push(p.target());
            }
        }
        for c in &self.coverage {
            if let Ok(t) = TargetSpec::new(Complex64::new(c.a_re, c.a_im), c.k) {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Points of `target`, ascending in γ.
    pub fn points_for(&self, target: &TargetSpec) -> Vec<APoint> {
        self.points.iter().filter(|p| p.target() == *target).copied().collect()
    }

    /// Largest T such that (1, T] has been searched for `target`, if any.
    pub fn covered_up_to(&self, target: &TargetSpec) -> Option<f64> {
        let mut reach: Option<f64> = None;
        let mut windows: Vec<&Coverage> = self.coverage.iter().filter(|c| c.is_for(target)).collect();
        windows.sort_by(|a, b| a.t_low.total_cmp(&b.t_low));
        for c in windows {
            let start = reach.unwrap_or(1.0 + LOWER_EDGE_SLACK);
            if c.t_low <= start {
                reach = Some(reach.unwrap_or(1.0).max(c.t_high));
            } else {
                break;
            }
        }
        reach
    }

    /// Fails with [`CacheError::Incomplete`] unless (1, t_high] is covered for `target`.
    pub fn require(&self, target: &TargetSpec, t_high: f64) -> Result<(), CacheError> {
        match self.covered_up_to(target) {
            Some(reach) if reach >= t_high => Ok(()),
            reach => Err(CacheError::Incomplete { target: *target, t_low: reach.unwrap_or(1.0), t_high }),
        }
    }

    /// Ordinates with multiplicity of `target` in `(t_low, t_high]`, ascending.
    pub fn ordinates(&self, target: &TargetSpec, t_low: f64, t_high: f64) -> Result<Vec<(f64, u32)>, CacheError> {
        self.require(target, t_high)?;
        Ok(self
            .points
            .iter()
            .filter(|p| p.target() == *target && t_low < p.gamma() && p.gamma() <= t_high)
            .map(|p| (p.gamma(), p.multiplicity()))
            .collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = HEADER.join(",");
        out.push('\n');
        for p in &self.points {
            let a = p.target().a();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.target().k(),
                a.re,
                a.im,
                p.beta(),
                format_gamma(p.gamma()),
                p.multiplicity(),
                p.residual()
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, CacheError> {
        let bad = |line: usize, msg: String| CacheError::Format(format!("line {line}: {msg}"));
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| CacheError::Format(e.to_string()))?;
        if header.iter().map(str::trim).ne(HEADER.iter().copied()) {
            return Err(CacheError::Format(format!("expected header {}", HEADER.join(","))));
        }
        let mut points = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| bad(line, e.to_string()))?;
            if record.len() != HEADER.len() {
                return Err(bad(line, format!("expected {} fields", HEADER.len())));
            }
            let field = |j: usize| record[j].trim();
            let real = |j: usize| field(j).parse::<f64>().map_err(|_| bad(line, format!("bad {} {:?}", HEADER[j], field(j))));
            let k: u32 = field(0).parse().map_err(|_| bad(line, format!("bad k {:?}", field(0))))?;
            let target = TargetSpec::new(Complex64::new(real(1)?, real(2)?), k).map_err(|e| bad(line, e.to_string()))?;
            let multiplicity: u32 = field(5).parse().map_err(|_| bad(line, format!("bad multiplicity {:?}", field(5))))?;
            let point = APoint::new(real(3)?, real(4)?, target, real(6)?, multiplicity).map_err(|e| bad(line, e.to_string()))?;
            points.push(point);
        }
        if points.windows(2).any(|w| point_order(&w[0], &w[1]) == std::cmp::Ordering::Greater) {
            return Err(CacheError::Format("rows are not sorted by (k, a_re, a_im, gamma)".into()));
        }
        let mut cache = ApointCache { points, coverage: Vec::new() };
        cache.coverage = cache.implied_coverage();
        Ok(cache)
    }

    /// Coverage assumed when no sidecar exists: (1, max γ] per target.
    fn implied_coverage(&self) -> Vec<Coverage> {
        self.targets()
            .iter()
            .map(|t| {
                let pts = self.points_for(t);
                Coverage {
                    k: t.k(),
                    a_re: t.a().re,
                    a_im: t.a().im,
                    t_low: 1.0,
                    t_high: pts.last().map_or(1.0, |p| p.gamma()),
                    sigma_min: f64::NEG_INFINITY,
                    sigma_max: f64::INFINITY,
                    count: pts.iter().map(|p| p.multiplicity() as u64).sum(),
                }
            })
            .collect()
    }

    pub fn meta_path(path: &Path) -> PathBuf {
        let mut meta = path.as_os_str().to_owned();
        meta.push(".meta.json");
        PathBuf::from(meta)
    }

    /// Writes the CSV and its coverage sidecar atomically.
    pub fn write(&self, path: &Path) -> Result<(), CacheError> {
        let meta = serde_json::to_string_pretty(&self.coverage).map_err(|e| CacheError::Format(e.to_string()))?;
        write_atomic(&Self::meta_path(path), meta.as_bytes())?;
        write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, CacheError> {
        let text = fs::read_to_string(path).map_err(|source| CacheError::Io { path: path.to_path_buf(), source })?;
        let mut cache = Self::from_csv(&text)?;
        let meta_path = Self::meta_path(path);
        match fs::read_to_string(&meta_path) {
            Ok(meta) => {
                cache.coverage = serde_json::from_str(&meta).map_err(|e| CacheError::Format(format!("{}: {e}", meta_path.display())))?;
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(source) => return Err(CacheError::Io { path: meta_path, source }),
        }
        Ok(cache)
    }

    /// Reads `path` if it exists, otherwise returns an empty cache.
    pub fn open_or_default(path: &Path) -> Result<Self, CacheError> {
        if path.exists() {
            Self::read(path)
        } else {
            Ok(Self::new())
        }
    }
}
