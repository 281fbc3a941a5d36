//! Minimal SVG line chart.

use std::fmt::Write as _;

use crate::report::fmt_num;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

/// Line chart of `values` against their position, with the first, middle
/// and last `labels` on the horizontal axis.
pub fn line_chart_svg(title: &str, labels: &[String], values: &[f64]) -> String {
    let n = values.len();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let x = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (n.max(2) - 1) as f64;
    let y = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#);
    for v in [lo, 0.5 * (lo + hi), hi] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            x0 - 6.0,
            y(v),
            fmt_num(v)
        );
    }
    if n > 0 {
        for i in [0, n / 2, n - 1] {
            let label = labels.get(i).cloned().unwrap_or_else(|| (i + 1).to_string());
            let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, x(i), y0 + 18.0, escape(&label));
        }
        let points: Vec<String> = values.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, points.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_contains_every_point() {
        let labels: Vec<String> = (1955..1960).map(|y| y.to_string()).collect();
        let svg = line_chart_svg("sigma <log>", &labels, &[0.9, 0.92, 0.91, 0.95, 0.94]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("sigma &lt;log&gt;"));
        assert!(svg.contains(">1955<") && svg.contains(">1959<"));
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(poly.matches(',').count(), 5);
    }

    #[test]
    fn flat_series() {
        let svg = line_chart_svg("flat", &[], &[1.0, 1.0]);
        assert!(!svg.contains("NaN"));
    }
}
