//! Minimal static SVG of residual curves on a log scale.

use std::fmt::Write as _;

use crate::csv::TraceColumns;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
/// Residuals below this are clamped before taking logarithms.
const FLOOR: f64 = 1e-300;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    values: &'a [f64],
}

pub fn render_residuals(cols: &TraceColumns) -> String {
    let series = [
        Series {
            label: "|x - y|",
            color: "#1f77b4",
            values: &cols.res_xy,
        },
        Series {
            label: "|x+ - x|",
            color: "#d62728",
            values: &cols.res_dx,
        },
    ];
    let logs = |v: &[f64]| -> Vec<f64> { v.iter().map(|r| r.max(FLOOR).log10()).collect() };
    let all: Vec<f64> = series.iter().flat_map(|s| logs(s.values)).filter(|v| v.is_finite()).collect();
    let (mut lo, mut hi) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 0.0);
    }
    lo = lo.floor();
    hi = hi.ceil().max(lo + 1.0);
    let (k0, k1) = match (cols.k.first(), cols.k.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a, a + 1.0),
        _ => (0.0, 1.0),
    };
    let px = |k: f64| MARGIN + (k - k0) / (k1 - k0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let mut e = lo as i64;
    let step = (((hi - lo) / 8.0).ceil() as i64).max(1);
    while e as f64 <= hi {
        let y = py(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            WIDTH - MARGIN,
            MARGIN - 6.0,
            y + 4.0
        );
        e += step;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration k ({k0} to {k1})</text>"#,
        WIDTH / 2.0,
        HEIGHT - MARGIN / 3.0
    );
    for (i, ser) in series.iter().enumerate() {
        let points: Vec<String> = cols
            .k
            .iter()
            .zip(logs(ser.values))
            .filter(|(_, v)| v.is_finite())
            .map(|(&k, v)| format!("{:.2},{:.2}", px(k), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            ser.color,
            points.join(" ")
        );
        let ly = MARGIN + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 8.0,
            ser.color,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}
