use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use apoint_equidist::apoint::{count_between, ApointCache};
use apoint_equidist::counting::main_term;
use apoint_equidist::TargetSpec;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_apoint-equidist")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(run: &Run) -> Value {
    assert_eq!(run.code, 0, "{}", run.stderr);
    serde_json::from_str(&run.stdout).unwrap()
}

fn workdir() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    })
}

/// Zeros of zeta up to 500, computed once per test binary.
fn zeta_cache() -> &'static str {
    static CACHE: OnceLock<String> = OnceLock::new();
    CACHE.get_or_init(|| {
        let path = workdir().join("zeros.csv").to_str().unwrap().to_string();
        let r = run(&["apoints", "--k", "0", "--a", "0", "--t-max", "500", "--cache", &path]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        path
    })
}

fn path(name: &str) -> String {
    workdir().join(name).to_str().unwrap().to_string()
}

#[test]
fn apoints_count_matches_winding_number() {
    let r = run(&["apoints", "--t-max", "500", "--cache", zeta_cache()]);
    let summary = json(&r);
    let target = TargetSpec::real(0.0, 0).unwrap();
    assert_eq!(summary["count"], count_between(&target, 1.0, 500.0).unwrap());
    assert_eq!(summary["count"], 269);
    assert!(summary["max_residual"].as_f64().unwrap() < 1e-9);
    assert!(r.stderr.contains("wall time"));
}

#[test]
fn apoints_for_derivative_zeros_follows_main_term() {
    let cache = path("dzeros.csv");
    let summary = json(&run(&["apoints", "--k", "1", "--t-max", "300", "--cache", &cache]));
    let count = summary["count"].as_f64().unwrap();
    let target = TargetSpec::real(0.0, 1).unwrap();
    assert!((count - main_term(300.0, &target)).abs() <= 2.0 * 300f64.ln());
    assert_eq!(summary["n_ak"], 2);
}

#[test]
fn apoints_one_points_use_doubled_n() {
    let cache = path("ones.csv");
    let r = run(&["apoints", "--k", "0", "--a", "1+0i", "--t-max", "300", "--cache", &cache]);
    let summary = json(&r);
    assert_eq!(summary["n_ak"], 2);
    assert!(r.stderr.contains("n_ak = 2"));
    let target = TargetSpec::real(1.0, 0).unwrap();
    assert_eq!(summary["main_term"].as_f64().unwrap(), main_term(300.0, &target));
}

#[test]
fn cache_round_trips_bit_for_bit() {
    let text = std::fs::read_to_string(zeta_cache()).unwrap();
    let cache = ApointCache::read(Path::new(zeta_cache())).unwrap();
    assert_eq!(cache.to_csv(), text);
    let again = ApointCache::from_csv(&cache.to_csv()).unwrap();
    assert_eq!(again.points(), cache.points());
}

#[test]
fn rerun_with_covered_range_leaves_cache_untouched() {
    let cache = path("rerun.csv");
    json(&run(&["apoints", "--t-max", "60", "--cache", &cache]));
    let first = std::fs::read(&cache).unwrap();
    let meta = std::fs::read(ApointCache::meta_path(Path::new(&cache))).unwrap();
    let again = json(&run(&["apoints", "--t-max", "40", "--cache", &cache]));
    assert_eq!(again["count"], 6);
    assert_eq!(std::fs::read(&cache).unwrap(), first);
    assert_eq!(std::fs::read(ApointCache::meta_path(Path::new(&cache))).unwrap(), meta);
    // extending finds the same ordinates as a from-scratch run; abscissae may
    // differ in the last bits since Newton starts from different seeds
    json(&run(&["apoints", "--t-max", "120", "--cache", &cache]));
    let fresh = path("fresh.csv");
    json(&run(&["apoints", "--t-max", "120", "--cache", &fresh]));
    let gammas = |p: &str| -> Vec<f64> { ApointCache::read(Path::new(p)).unwrap().points().iter().map(|a| a.gamma()).collect() };
    assert_eq!(gammas(&cache), gammas(&fresh));
}

#[test]
fn counting_residuals_and_grid_validation() {
    let curve = json(&run(&["verify-counting", "--cache", zeta_cache(), "--t-grid", "50,100,200,400"]));
    let observed: Vec<u64> = serde_json::from_value(curve["observed"].clone()).unwrap();
    assert_eq!(observed, vec![10, 29, 79, 202]);
    for (t, r) in [50.0, 100.0, 200.0, 400.0].iter().zip(curve["residual"].as_array().unwrap()) {
        assert!(r.as_f64().unwrap().abs() <= 2.0 * f64::ln(*t));
    }
    assert_eq!(run(&["verify-counting", "--cache", zeta_cache(), "--t-grid", ""]).code, 2);
    assert_eq!(run(&["verify-counting", "--cache", zeta_cache(), "--t-grid", "100,abc"]).code, 2);
}

#[test]
fn counting_summary_names_n_for_derivative_targets() {
    let cache = path("second.csv");
    json(&run(&["apoints", "--k", "2", "--t-max", "60", "--cache", &cache]));
    let r = run(&["verify-counting", "--k", "2", "--cache", &cache, "--t-grid", "30,60"]);
    json(&r);
    assert!(r.stderr.contains("n_ak = 2"), "{}", r.stderr);
}

#[test]
fn equidist_report_and_banner() {
    let plot = path("equidist.svg");
    let r = run(&[
        "equidist", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=0.5,w=0", "--h", "1", "--h", "2", "--plot", &plot,
    ]);
    let report = json(&r);
    assert_eq!(report["banner"], Value::Null);
    assert_eq!(report["frequencies"], serde_json::json!([1, 2]));
    assert_eq!(report["prefixes"], serde_json::json!([100, 200, 240]));
    assert!(std::fs::read_to_string(&plot).unwrap().starts_with("<svg"));

    let r = run(&["equidist", "--cache", zeta_cache(), "--family", "POWERLOG:u=1,v=1,w=0"]);
    let report = json(&r);
    assert_eq!(report["banner"], "Borderline (not covered by Theorem 1.2; see Fujii)");
    assert!(r.stderr.contains("Borderline"));

    let prefixed = json(&run(&["equidist", "--cache", zeta_cache(), "--family", "loglog:u=1,v=2,w=0", "--prefixes", "10,50,100"]));
    assert_eq!(prefixed["prefixes"], serde_json::json!([10, 50, 100]));
}

#[test]
fn equidist_rejects_bad_input() {
    let cases: [&[&str]; 6] = [
        &["equidist", "--cache", zeta_cache(), "--family", "linear:alpha=0"],
        &["equidist", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=0.5"],
        &["equidist", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=0.5,w=0", "--h", "0"],
        &["equidist", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=0.5,w=0", "--prefixes", "200,100"],
        &["equidist", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=0.5,w=0", "--t-max", "900"],
        &["equidist", "--cache", "/nonexistent/cache.csv", "--family", "powerlog:u=1,v=0.5,w=0"],
    ];
    for args in cases {
        let r = run(args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
        assert!(r.stdout.is_empty());
    }
}

#[test]
fn decompose_reports() {
    let zero = json(&run(&["decompose", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=0.5,w=0", "--t-max", "100"]));
    assert_eq!(zero["count"], 0);
    for key in ["S_total", "S1", "S2"] {
        assert_eq!(zero[key], serde_json::json!([0.0, 0.0]));
    }
    let plot = path("decompose.svg");
    let grid = json(&run(&[
        "decompose", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=0.5,w=0", "--t-max", "500", "--t-grid", "200,500",
        "--plot", &plot,
    ]));
    let reports = grid.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1]["count"], 269 - 29);
    assert_eq!(reports[1]["envelope_terms"].as_object().unwrap().len(), 5);
    assert!(std::fs::read_to_string(&plot).unwrap().contains("polyline"));
}

#[test]
fn decompose_refuses_inadmissible_families() {
    let r = run(&["decompose", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=2,w=0", "--t-max", "500"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("C6"), "{}", r.stderr);
    let r = run(&["decompose", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=1,w=1", "--t-max", "500"]);
    assert_eq!(r.code, 3);
    let r = run(&["decompose", "--cache", zeta_cache(), "--family", "linear:alpha=1", "--t-max", "500"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("Borderline"));
}

#[test]
fn check_conditions_verdicts() {
    let r = run(&["check-conditions", "--family", "powerlog:u=1,v=0.5,w=0"]);
    let report = json(&r);
    assert_eq!(report["classification"], "Admissible");
    assert!(report["verdicts"].as_object().unwrap().values().all(|v| v == "holds"));
    assert!(r.stderr.contains("symbolic classification Admissible"));

    let report = json(&run(&["check-conditions", "--family", "powerlog:u=1,v=2,w=0"]));
    assert_eq!(report["classification"], "Inadmissible");
    assert_eq!(report["verdicts"]["C6"], "fails");

    let report = json(&run(&["check-conditions", "--family", "loglog:u=1,v=2,w=0", "--t-max", "1e6"]));
    assert_eq!(report["classification"], Value::Null);
    assert!(report["verdicts"].as_object().unwrap().values().all(|v| v == "holds"));
}

#[test]
fn exit_codes() {
    // invalid input
    for args in [
        &["apoints"][..],
        &["apoints", "--t-max", "abc"],
        &["apoints", "--t-max", "1"],
        &["apoints", "--k", "9", "--t-max", "10"],
        &["apoints", "--a", "1 + 2i", "--t-max", "10"],
        &["no-such-command"],
        &["check-conditions", "--family", "powerlog:u=1,v=0.5,w=0", "--c", "2"],
        &["check-conditions", "--family", "powerlog:u=1,v=0.5,w=0", "--t-max", "150"],
        &["check-conditions", "--family", "powerlog:u=0,v=0.5,w=0"],
        &["decompose", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=0.5,w=0", "--t-max", "50"],
        &["decompose", "--cache", zeta_cache(), "--family", "powerlog:u=1,v=0.5,w=0", "--t-max", "800"],
    ] {
        let r = run(args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
    }
    // numerically infeasible: the phase oscillates too fast to integrate
    let r = run(&["decompose", "--cache", zeta_cache(), "--family", "powerlog:u=1e12,v=0.5,w=0", "--t-max", "500"]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    assert!(r.stderr.starts_with("error: numeric failure"));
    // JSON to a file, nothing on stdout
    let out = path("conditions.json");
    let r = run(&["check-conditions", "--family", "powerlog:u=1,v=0.5,w=0", "--out", &out]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["classification"], "Admissible");
}
