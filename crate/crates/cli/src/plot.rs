//! Self-contained SVG line plots: stacked panels over a shared time axis,
//! y fixed to [0,1], one polyline per series.

use std::fmt::Write;

pub const MAX_POINTS: usize = 4000;

const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN: f64 = 50.0;

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
}

/// Evenly spaced sample of at most `max` indices into `0..len`, always
/// keeping the first and last.
pub fn sample_indices(len: usize, max: usize) -> Vec<usize> {
    if len <= max {
        return (0..len).collect();
    }
    let max = max.max(2);
    let mut out: Vec<usize> = (0..max).map(|i| i * (len - 1) / (max - 1)).collect();
    out.dedup();
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(panels: &[Panel]) -> String {
    let t_max = panels
        .iter()
        .flat_map(|p| p.series.iter().flat_map(|s| s.points.iter().map(|q| q.0)))
        .fold(1.0f64, f64::max);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = PANEL_HEIGHT - 2.0 * MARGIN;
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, panel) in panels.iter().enumerate() {
        let top = p as f64 * PANEL_HEIGHT + MARGIN;
        let x = |t: f64| MARGIN + t / t_max * plot_w;
        let y = |v: f64| top + (1.0 - v) * plot_h;
        let _ = writeln!(svg, r#"<g class="panel">"#);
        let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{:.1}" font-weight="bold">{}</text>"#, top - 15.0, escape(&panel.title));
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN}" y="{top:.1}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
        );
        for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let _ = writeln!(
                svg,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{tick}</text>"##,
                MARGIN,
                y(tick),
                MARGIN + plot_w,
                y(tick),
                MARGIN - 5.0,
                y(tick) + 4.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">t = {t_max}</text>"#,
            MARGIN + plot_w,
            top + plot_h + 18.0
        );
        for (i, s) in panel.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut pts = String::new();
            for idx in sample_indices(s.points.len(), MAX_POINTS) {
                let (t, v) = s.points[idx];
                let _ = write!(pts, "{:.2},{:.2} ", x(t), y(v.clamp(0.0, 1.0)));
            }
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#,
                pts.trim_end(),
                escape(&s.name)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
                WIDTH - MARGIN + 5.0,
                top + 14.0 * (i as f64 + 1.0),
                escape(&s.name)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}
