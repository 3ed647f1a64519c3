//! Minimal SVG line charts and histograms for report plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { name: name.into(), points: points.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite()).collect() }
    }
}

/// One panel; panels are stacked vertically by [`document`].
pub enum Panel {
    Lines { title: String, x_label: String, log_x: bool, series: Vec<Series> },
    Histogram { title: String, counts: Vec<u64> },
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn frame(out: &mut String, title: &str, x_label: &str, x: (f64, f64), y: (f64, f64)) {
    let (w, h) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let _ = writeln!(out, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, WIDTH / 2.0, HEIGHT - 10.0, escape(x_label));
    for (value, px) in [(x.0, MARGIN), (x.1, WIDTH - MARGIN)] {
        let _ = writeln!(out, r#"<text x="{px}" y="{}" text-anchor="middle" font-size="10">{}</text>"#, HEIGHT - MARGIN + 14.0, tick(value));
    }
    for (value, py) in [(y.0, HEIGHT - MARGIN), (y.1, MARGIN)] {
        let _ = writeln!(out, r#"<text x="{}" y="{py}" text-anchor="end" font-size="10">{}</text>"#, MARGIN - 4.0, tick(value));
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn render(panel: &Panel) -> String {
    let mut out = String::new();
    match panel {
        Panel::Lines { title, x_label, log_x, series } => {
            let tx = |x: f64| if *log_x { x.log10() } else { x };
            let xr = range(series.iter().flat_map(|s| s.points.iter().map(|p| tx(p.0))));
            let yr = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
            let label = if *log_x { format!("{x_label} (log scale)") } else { x_label.clone() };
            let shown = |v: f64| if *log_x { 10f64.powf(v) } else { v };
            frame(&mut out, title, &label, (shown(xr.0), shown(xr.1)), yr);
            let px = |x: f64| MARGIN + (tx(x) - xr.0) / (xr.1 - xr.0) * (WIDTH - 2.0 * MARGIN);
            let py = |y: f64| HEIGHT - MARGIN - (y - yr.0) / (yr.1 - yr.0) * (HEIGHT - 2.0 * MARGIN);
            for (i, s) in series.iter().enumerate() {
                let color = COLORS[i % COLORS.len()];
                let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
                for &(x, y) in &s.points {
                    let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#, px(x), py(y));
                }
                let ly = MARGIN + 14.0 + 14.0 * i as f64;
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{ly}" font-size="11" fill="{color}">{}</text>"#,
                    WIDTH - MARGIN - 150.0,
                    escape(&s.name)
                );
            }
        }
        Panel::Histogram { title, counts } => {
            let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
            frame(&mut out, title, "value mod 1", (0.0, 1.0), (0.0, top));
            let bw = (WIDTH - 2.0 * MARGIN) / counts.len().max(1) as f64;
            for (i, &c) in counts.iter().enumerate() {
                let h = c as f64 / top * (HEIGHT - 2.0 * MARGIN);
                let _ = writeln!(
                    out,
                    r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" stroke="white"/>"##,
                    MARGIN + i as f64 * bw,
                    HEIGHT - MARGIN - h,
                    bw,
                    h
                );
            }
        }
    }
    out
}

/// Stacks panels into a single SVG document.
pub fn document(panels: &[Panel]) -> String {
    let total = HEIGHT * panels.len() as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{total}\" viewBox=\"0 0 {WIDTH} {total}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (i, panel) in panels.iter().enumerate() {
        let _ = writeln!(out, r#"<g transform="translate(0,{})">"#, HEIGHT * i as f64);
        out.push_str(&render(panel));
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Counts of values in `bins` equal subintervals of [0, 1).
pub fn bin_counts(values: &[f64], bins: usize) -> Vec<u64> {
    let mut counts = vec![0; bins];
    for &v in values {
        let i = ((v * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_cover_unit_interval() {
        assert_eq!(bin_counts(&[0.0, 0.049, 0.999_999, 0.5], 20), {
            let mut c = vec![0; 20];
            c[0] = 2;
            c[10] = 1;
            c[19] = 1;
            c
        });
    }

    #[test]
    fn document_is_well_formed() {
        let svg = document(&[
            Panel::Lines {
                title: "a < b".into(),
                x_label: "N".into(),
                log_x: true,
                series: vec![Series::new("s", vec![(100.0, 0.5), (200.0, 0.25), (400.0, f64::NAN)])],
            },
            Panel::Histogram { title: "h".into(), counts: vec![1, 2, 3] },
        ]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<g ").count(), 2);
        assert!(!svg.contains("NaN"));
    }
}
