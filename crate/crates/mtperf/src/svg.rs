//! Minimal static SVG charts. Output carries no timestamps or ids, so it
//! is a pure function of the data.

use std::fmt::Write as _;

use mtperf_core::diagnostics::BoxplotStats;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw as a polyline instead of markers.
    pub line: bool,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Frame {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |a: f64, b: f64| if b > a { (b - a) * 0.05 } else { 0.5 };
        let (px, py) = (pad(x0, x1), pad(y0, y1));
        Frame {
            x0: x0 - px,
            x1: x1 + px,
            y0: y0 - py,
            y1: y1 + py,
        }
    }

    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        H - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (W - RIGHT + LEFT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (bx, by) = (H - BOTTOM, W - RIGHT);
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT:.1},{TOP:.1} L{LEFT:.1},{bx:.1} L{by:.1},{bx:.1}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (f.x0 + t * (f.x1 - f.x0), f.y0 + t * (f.y1 - f.y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.2}</text>"#,
            f.x(xv),
            bx + 15.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.2}</text>"#,
            LEFT - 5.0,
            f.y(yv) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (LEFT + by) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (TOP + bx) / 2.0,
        (TOP + bx) / 2.0,
        escape(y_label)
    );
}

/// Scatter/line chart with a legend on the right.
pub fn xy_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let f = Frame::fit(series.iter().flat_map(|s| s.points.iter().copied()));
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, x_label, y_label);
    let mut legend = Vec::new();
    for s in series {
        let color = match legend.iter().position(|l: &&str| *l == s.label) {
            Some(i) => PALETTE[i % PALETTE.len()],
            None => {
                legend.push(&s.label);
                PALETTE[(legend.len() - 1) % PALETTE.len()]
            }
        };
        if s.line {
            let d: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.1},{:.1}", f.x(x), f.y(y)))
                .collect();
            if !d.is_empty() {
                let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, d.join(" "));
            }
        } else {
            for &(x, y) in &s.points {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}" fill-opacity="0.8"/>"#,
                    f.x(x),
                    f.y(y)
                );
            }
        }
    }
    for (i, label) in legend.iter().enumerate() {
        let y = TOP + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            W - RIGHT + 15.0,
            y,
            PALETTE[i % PALETTE.len()],
            W - RIGHT + 30.0,
            y + 9.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One box per partition: quartile box, median line, whiskers, outliers.
pub fn boxplot_chart(title: &str, y_label: &str, stats: &[BoxplotStats]) -> String {
    let f = Frame::fit(
        stats
            .iter()
            .flat_map(|s| [(0.0, s.min), (stats.len() as f64, s.max)]),
    );
    let mut out = String::new();
    open(&mut out, title);
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT:.1},{TOP:.1} L{LEFT:.1},{:.1} L{:.1},{:.1}" fill="none" stroke="black"/>"#,
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM
    );
    for i in 0..=4 {
        let yv = f.y0 + i as f64 / 4.0 * (f.y1 - f.y0);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.2}</text>"#,
            LEFT - 5.0,
            f.y(yv) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0:.1}" text-anchor="middle" transform="rotate(-90 16 {0:.1})">{1}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        escape(y_label)
    );
    let slot = (W - LEFT - RIGHT) / stats.len().max(1) as f64;
    for (i, s) in stats.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let half = slot * 0.3;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
            f.y(s.whisker_low),
            f.y(s.whisker_high)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{color}" fill-opacity="0.4" stroke="black"/>"#,
            cx - half,
            f.y(s.q3),
            2.0 * half,
            (f.y(s.q1) - f.y(s.q3)).max(0.5)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{2:.1}" x2="{:.1}" y2="{2:.1}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            cx + half,
            f.y(s.median)
        );
        for &o in &s.outliers {
            let _ = writeln!(out, r#"<circle cx="{cx:.1}" cy="{:.1}" r="2.5" fill="none" stroke="black"/>"#, f.y(o));
        }
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            H - BOTTOM + 15.0,
            escape(&s.partition_key.label())
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use mtperf_core::data::PartitionKey;
    use mtperf_core::diagnostics::boxplot;

    #[test]
    fn charts_are_deterministic_svg() {
        let s = vec![Series {
            label: "a<b".into(),
            points: vec![(0.0, 1.0), (1.0, 2.0)],
            line: false,
        }];
        let a = xy_chart("t", "x", "y", &s);
        assert_eq!(a, xy_chart("t", "x", "y", &s));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("a&lt;b"));
        let b = boxplot_chart("b", "residual", &[boxplot(PartitionKey::ALL, &[1.0, 2.0, 3.0])]);
        assert!(b.contains("<rect") && b.contains(">all<"));
    }
}
