use std::path::Path;
use std::time::Instant;

use apoint_equidist::apoint::{locate_in_window, ApointCache, EngineConfig, StripWindow};
use apoint_equidist::conditions::{check_conditions_with, classify_power_log, ConditionId, ConditionReport, PowerLogClass, Verdict};
use apoint_equidist::counting::{main_term, n_ak, residual_curve};
use apoint_equidist::equidist::{default_prefixes, trend_report, ModOneSequence, WeylReport};
use apoint_equidist::families::{FamilyKind, FunctionFamily};
use apoint_equidist::oscillatory::{decompose, DecompositionReport};
use apoint_equidist::TargetSpec;
use serde::Serialize;

use crate::error::CliError;
use crate::svg::{bin_counts, document, Panel, Series};

/// Lower end of every a-point search; windows must start above t = 1.
pub const SEARCH_FROM: f64 = 1.0005;

pub const BORDERLINE_BANNER: &str = "Borderline (not covered by Theorem 1.2; see Fujii)";

/// Range used to name the failing condition of an inadmissible power-log family;
/// large enough to clear the low-t transients of admissible cells.
const REFUSAL_C: f64 = 2000.0;
const REFUSAL_T: f64 = 1e6;
const CHECK_GRID: usize = 200;

/// What a command produced: the JSON contract, human-readable notes and an optional plot.
pub struct Output {
    pub json: String,
    pub notes: Vec<String>,
    pub plot: Option<String>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn read_cache(path: &Path) -> Result<ApointCache, CliError> {
    if !path.exists() {
        return Err(CliError::Invalid(format!("cache {} does not exist; run `apoints` first", path.display())));
    }
    Ok(ApointCache::read(path)?)
}

fn covered(cache: &ApointCache, target: &TargetSpec, t_max: Option<f64>) -> Result<f64, CliError> {
    match (t_max, cache.covered_up_to(target)) {
        (Some(t), _) => Ok(t),
        (None, Some(t)) => Ok(t),
        (None, None) => Err(CliError::Invalid(format!("cache has no a-points for {target}"))),
    }
}

fn check_c(c: f64) -> Result<(), CliError> {
    if !(c > std::f64::consts::E) || !c.is_finite() {
        return Err(CliError::Invalid(format!("--c must exceed e, got {c}")));
    }
    Ok(())
}

/// Comma-separated list; an empty string is an empty list.
pub fn parse_list<T: std::str::FromStr>(text: &str, name: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Invalid(format!("cannot parse {name} entry {s:?}"))))
        .collect()
}

#[derive(Serialize)]
struct ApointsSummary {
    target: TargetSpec,
    t_max: f64,
    count: u64,
    max_residual: f64,
    n_ak: u32,
    main_term: f64,
}

pub fn apoints(target: &TargetSpec, t_max: f64, cache_path: &Path) -> Result<Output, CliError> {
    if !(t_max > SEARCH_FROM) || !t_max.is_finite() {
        return Err(CliError::Invalid(format!("--t-max must be finite and above {SEARCH_FROM}, got {t_max}")));
    }
    let start = Instant::now();
    let mut cache = ApointCache::open_or_default(cache_path)?;
    let from = cache.covered_up_to(target).unwrap_or(SEARCH_FROM);
    if from < t_max {
        let window = StripWindow::strip(from, t_max)?;
        let points = locate_in_window(target, &window, &EngineConfig::default())?;
        cache.insert_window(target, &window, &points);
        cache.write(cache_path)?;
    }
    let points: Vec<_> = cache.points_for(target).into_iter().filter(|p| p.gamma() <= t_max).collect();
    let count = points.iter().map(|p| p.multiplicity() as u64).sum();
    let max_residual = points.iter().map(|p| p.residual()).fold(0.0, f64::max);
    let n = n_ak(target);
    let summary = ApointsSummary { target: *target, t_max, count, max_residual, n_ak: n, main_term: main_term(t_max, target) };
    let notes = vec![format!(
        "{target}: count {count} up to T = {t_max}, max residual {max_residual:.3e}, main term (n_ak = {n}) {:.3}, wall time {:.2} s",
        summary.main_term,
        start.elapsed().as_secs_f64()
    )];
    Ok(Output { json: to_json(&summary)?, notes, plot: None })
}

pub fn verify_counting(target: &TargetSpec, cache_path: &Path, t_grid: Option<&str>) -> Result<Output, CliError> {
    let cache = read_cache(cache_path)?;
    let grid: Vec<f64> = match t_grid {
        Some(text) => parse_list(text, "--t-grid")?,
        None => {
            let top = covered(&cache, target, None)?;
            let mut grid: Vec<f64> = std::iter::successors(Some(50.0), |t| Some(t * 2.0)).take_while(|&t| t <= top).collect();
            if grid.last() != Some(&top) && top > 50.0 {
                grid.push(top);
            }
            grid
        }
    };
    if grid.is_empty() {
        return Err(CliError::Invalid("empty T grid".into()));
    }
    let curve = residual_curve(target, &cache, &grid)?;
    let n = n_ak(target);
    let notes = vec![format!(
        "{target}: n_ak = {n}; max |residual| / log T = {:.4} over {} grid points",
        curve.max_residual_ratio(),
        grid.len()
    )];
    let abs_residual: Vec<(f64, f64)> = grid.iter().zip(&curve.residual).map(|(&t, &r)| (t, r.abs())).collect();
    let env = |name: &str, v: &[Option<f64>]| Series::new(name, grid.iter().zip(v).filter_map(|(&t, e)| e.map(|e| (t, e))).collect());
    let plot = document(&[Panel::Lines {
        title: format!("|N(T) - main term| for {target}"),
        x_label: "T".into(),
        log_x: true,
        series: vec![
            Series::new("|residual|", abs_residual),
            Series::new("log T", grid.iter().copied().zip(curve.envelopes.log_t.iter().copied()).collect()),
            env("log T / log log T", &curve.envelopes.log_t_over_loglog_t),
            env("log T / sqrt(log log T)", &curve.envelopes.log_t_over_sqrt_loglog_t),
        ],
    }]);
    Ok(Output { json: to_json(&curve)?, notes, plot: Some(plot) })
}

fn is_borderline(family: &FunctionFamily) -> Result<bool, CliError> {
    Ok(match family.kind() {
        FamilyKind::PowerLog { u, v, w } => classify_power_log(u, v, w)? == PowerLogClass::Borderline,
        FamilyKind::LinearPhase { .. } => true,
        _ => false,
    })
}

#[derive(Serialize)]
struct EquidistOutput {
    family: FunctionFamily,
    target: TargetSpec,
    c: f64,
    t_max: f64,
    banner: Option<&'static str>,
    #[serde(flatten)]
    report: WeylReport,
}

pub struct EquidistRequest<'a> {
    pub target: TargetSpec,
    pub family: FunctionFamily,
    pub cache_path: &'a Path,
    pub c: f64,
    pub t_max: Option<f64>,
    pub hs: Vec<i64>,
    pub prefixes: Option<Vec<usize>>,
}

pub fn equidist(req: &EquidistRequest) -> Result<Output, CliError> {
    check_c(req.c)?;
    if req.hs.is_empty() {
        return Err(CliError::Invalid("at least one --h is required".into()));
    }
    let cache = read_cache(req.cache_path)?;
    let t_max = covered(&cache, &req.target, req.t_max)?;
    let ordinates = cache.ordinates(&req.target, req.c.max(1.0), t_max)?;
    let mut values = Vec::new();
    for (gamma, m) in ordinates {
        let x = req.family.eval_f(gamma, 0)?;
        values.extend(std::iter::repeat(x).take(m as usize));
    }
    if values.is_empty() {
        return Err(CliError::Invalid(format!("no a-points in ({}, {t_max}]", req.c)));
    }
    let label = format!("{} over {}", req.family, req.target);
    let seq = ModOneSequence::new(values, label)?;
    let prefixes = req.prefixes.clone().unwrap_or_else(|| default_prefixes(seq.len()));
    let report = trend_report(&seq, &req.hs, &prefixes)?;
    let banner = is_borderline(&req.family)?.then_some(BORDERLINE_BANNER);

    let mut notes: Vec<String> = banner.iter().map(|b| b.to_string()).collect();
    let last = prefixes.len() - 1;
    for (h, row) in report.frequencies.iter().zip(&report.magnitudes) {
        notes.push(format!("h = {h}: |S_h(N)| = {:.4} at N = {}", row[last], prefixes[last]));
    }
    notes.push(format!("D*_N = {:.4} at N = {}", report.discrepancies[last], prefixes[last]));

    let ns: Vec<f64> = prefixes.iter().map(|&n| n as f64).collect();
    let plot = document(&[
        Panel::Lines {
            title: "|S_h(N)|".into(),
            x_label: "N".into(),
            log_x: true,
            series: report
                .frequencies
                .iter()
                .zip(&report.magnitudes)
                .map(|(h, row)| Series::new(format!("h = {h}"), ns.iter().copied().zip(row.iter().copied()).collect()))
                .collect(),
        },
        Panel::Lines {
            title: "star discrepancy".into(),
            x_label: "N".into(),
            log_x: true,
            series: vec![Series::new("D*_N", ns.iter().copied().zip(report.discrepancies.iter().copied()).collect())],
        },
        Panel::Histogram { title: format!("{{f(gamma)}}, {} values", seq.len()), counts: bin_counts(seq.values(), 20) },
    ]);
    let out = EquidistOutput { family: req.family, target: req.target, c: req.c, t_max, banner, report };
    Ok(Output { json: to_json(&out)?, notes, plot: Some(plot) })
}

fn first_failure(report: &ConditionReport) -> Option<ConditionId> {
    ConditionId::ALL.iter().copied().find(|id| report.verdict(*id) == Verdict::Fails)
}

/// `Ok(Some(banner))` for the borderline case, `Err(Refused)` naming a failing
/// condition for inadmissible families.
pub fn admissibility_gate(family: &FunctionFamily, target: &TargetSpec, c: f64) -> Result<Option<&'static str>, CliError> {
    let n = n_ak(target);
    let refuse = |report: &ConditionReport, range: (f64, f64)| -> Result<Option<&'static str>, CliError> {
        match first_failure(report) {
            Some(id) => {
                let witness = report.witness.map(|t| format!(" at t = {t}")).unwrap_or_default();
                Err(CliError::Refused(format!(
                    "{family} is inadmissible: condition {id:?} fails{witness} (checked on [{}, {}])",
                    range.0, range.1
                )))
            }
            None => Ok(None),
        }
    };
    match family.kind() {
        FamilyKind::PowerLog { u, v, w } => match classify_power_log(u, v, w)? {
            PowerLogClass::Admissible => Ok(None),
            PowerLogClass::Borderline => Ok(Some(BORDERLINE_BANNER)),
            PowerLogClass::Inadmissible => {
                let lo = c.max(REFUSAL_C);
                let hi = REFUSAL_T.max(4.0 * lo);
                let report = check_conditions_with(family, lo, hi, CHECK_GRID, n)?;
                refuse(&report, (lo, hi))?;
                Err(CliError::Refused(format!("{family} lies outside the admissible (v, w) region")))
            }
        },
        FamilyKind::LinearPhase { .. } => Ok(Some(BORDERLINE_BANNER)),
        _ => {
            let hi = REFUSAL_T.max(4.0 * c);
            let report = check_conditions_with(family, c, hi, CHECK_GRID, n)?;
            refuse(&report, (c, hi))
        }
    }
}

pub struct DecomposeRequest<'a> {
    pub target: TargetSpec,
    pub family: FunctionFamily,
    pub cache_path: &'a Path,
    pub c: f64,
    pub t_max: f64,
    pub t_grid: Option<Vec<f64>>,
    pub quad_tol: f64,
}

pub fn decompose_cmd(req: &DecomposeRequest) -> Result<Output, CliError> {
    check_c(req.c)?;
    if !(req.quad_tol > 0.0) {
        return Err(CliError::Invalid(format!("--quad-tol must be positive, got {}", req.quad_tol)));
    }
    let banner = admissibility_gate(&req.family, &req.target, req.c)?;
    let cache = read_cache(req.cache_path)?;
    let grid = req.t_grid.clone().unwrap_or_else(|| vec![req.t_max]);
    if grid.is_empty() {
        return Err(CliError::Invalid("empty T grid".into()));
    }
    let reports = grid
        .iter()
        .map(|&t| decompose(&req.family, &req.target, req.c, t, &cache, req.quad_tol))
        .collect::<Result<Vec<DecompositionReport>, _>>()?;

    let mut notes: Vec<String> = banner.iter().map(|b| b.to_string()).collect();
    for r in &reports {
        notes.push(format!(
            "T = {}: count {}, |S_total| = {:.4}, |S1| = {:.4}, |S2| = {:.4}, |S_total|/count = {:.4}",
            r.t,
            r.count,
            r.s_total.norm(),
            r.s1.norm(),
            r.s2.norm(),
            r.normalized_total()
        ));
    }
    let plot = document(&[Panel::Lines {
        title: format!("{} over {}", req.family, req.target),
        x_label: "T".into(),
        log_x: true,
        series: vec![
            Series::new("|S_total| / (N(T) - N(c))", reports.iter().map(|r| (r.t, r.normalized_total())).collect()),
            Series::new(
                "S1 envelope / (N(T) - N(c))",
                reports.iter().filter(|r| r.count > 0).map(|r| (r.t, r.s1_envelope() / r.count as f64)).collect(),
            ),
        ],
    }]);
    let json = match req.t_grid {
        Some(_) => to_json(&reports)?,
        None => to_json(&reports[0])?,
    };
    Ok(Output { json, notes, plot: Some(plot) })
}

#[derive(Serialize)]
struct ConditionsOutput {
    family: FunctionFamily,
    n_ak: u32,
    t_max: f64,
    classification: Option<PowerLogClass>,
    #[serde(flatten)]
    report: ConditionReport,
}

pub fn check_conditions_cmd(family: &FunctionFamily, target: &TargetSpec, c: f64, t_max: f64, grid: usize) -> Result<Output, CliError> {
    check_c(c)?;
    let n = n_ak(target);
    let report = check_conditions_with(family, c, t_max, grid, n)?;
    let classification = match family.kind() {
        FamilyKind::PowerLog { u, v, w } => Some(classify_power_log(u, v, w)?),
        _ => None,
    };
    let mut notes = Vec::new();
    if let Some(class) = classification {
        notes.push(format!("{family}: symbolic classification {class:?}"));
    }
    for id in ConditionId::ALL {
        notes.push(format!("{:<8} {:?}", format!("{id:?}"), report.verdict(id)));
    }
    if let Some(w) = report.witness {
        notes.push(format!("first failure observed at t = {w}"));
    }
    let out = ConditionsOutput { family: *family, n_ak: n, t_max, classification, report };
    Ok(Output { json: to_json(&out)?, notes, plot: None })
}
