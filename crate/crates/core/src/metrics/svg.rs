//! Minimal SVG line charts: a column of panes sharing one x range.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pane {
    pub title: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const PANE_HEIGHT: f64 = 220.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 36.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Render panes stacked vertically. Each pane gets its own y range and
/// legend; an empty pane still draws its axes.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, panes: &[Pane]) -> String {
    let n = panes.len().max(1);
    let height = n as f64 * PANE_HEIGHT + 24.0;
    let (x0, x1) = bounds(panes.iter().flat_map(|p| p.series.iter().flat_map(|s| s.points.iter().map(|p| p.0))));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<text x="{}" y="16" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, esc(title));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANE_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let empty = [Pane { title: String::new(), series: Vec::new() }];
    let panes = if panes.is_empty() { &empty[..] } else { panes };
    for (i, pane) in panes.iter().enumerate() {
        let top = 24.0 + i as f64 * PANE_HEIGHT + MARGIN_TOP;
        let bottom = top + plot_h;
        let (y0, y1) = bounds(pane.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| bottom - (y - y0) / (y1 - y0) * plot_h;
        let _ = writeln!(out, r#"<g>"#);
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12">{}</text>"#, MARGIN_LEFT, top - 8.0, esc(&pane.title));
        let _ = writeln!(
            out,
            r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#,
            l = MARGIN_LEFT,
            t = top,
            b = bottom,
            r = MARGIN_LEFT + plot_w
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let yv = y0 + f * (y1 - y0);
            let xv = x0 + f * (x1 - x0);
            let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN_LEFT - 4.0, num(sy(yv) + 4.0), num(yv));
            let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, num(sx(xv)), bottom + 14.0, num(xv));
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, MARGIN_LEFT + plot_w / 2.0, bottom + 28.0, esc(x_label));
        let _ = writeln!(
            out,
            r#"<text x="14" y="{y}" text-anchor="middle" transform="rotate(-90 14 {y})">{}</text>"#,
            esc(y_label),
            y = (top + bottom) / 2.0
        );
        for (j, s) in pane.series.iter().enumerate() {
            let color = COLORS[j % COLORS.len()];
            let pts: Vec<String> = s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).map(|&(x, y)| format!("{},{}", num(sx(x)), num(sy(y)))).collect();
            if !pts.is_empty() {
                let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, pts.join(" "));
            }
            let ly = top + 12.0 + j as f64 * 14.0;
            let lx = MARGIN_LEFT + plot_w + 10.0;
            let _ = writeln!(out, r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#, ly - 4.0, lx + 16.0, ly - 4.0);
            let _ = writeln!(out, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 20.0, esc(&s.label));
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}
