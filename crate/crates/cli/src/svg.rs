//! Minimal static SVG charts. Styling is inline and text uses the generic
//! `sans-serif` family, so files render the same anywhere.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub color: &'a str,
    pub dashed: bool,
}

pub struct Bars<'a> {
    pub edges: &'a [f64],
    pub heights: &'a [f64],
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, f: &Frame, title: &str, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect width="{W}" height="{H}" fill="white"/>
<g font-family="sans-serif" font-size="12" fill="black">
<text x="{tx}" y="22" text-anchor="middle" font-size="14">{title}</text>
<text x="{tx}" y="{xl}" text-anchor="middle">{xlabel}</text>
<text x="16" y="{ty}" text-anchor="middle" transform="rotate(-90 16 {ty})">{ylabel}</text>
</g>
<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>
"#,
        tx = W / 2.0,
        xl = H - 12.0,
        ty = (TOP + H - BOTTOM) / 2.0,
        pw = W - LEFT - RIGHT,
        ph = H - TOP - BOTTOM,
        title = escape(title),
        xlabel = escape(xlabel),
        ylabel = escape(ylabel),
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let x = f.x0 + t * (f.x1 - f.x0);
        let y = f.y0 + t * (f.y1 - f.y0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            f.px(x),
            H - BOTTOM + 16.0,
            tick(x)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            f.py(y) + 3.0,
            tick(y)
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn polyline(out: &mut String, f: &Frame, s: &Series) {
    let pts: Vec<String> = s
        .x
        .iter()
        .zip(s.y)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y)))
        .collect();
    let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{}" stroke-width="1.6"{dash} points="{}"/>"#,
        s.color,
        pts.join(" ")
    );
}

fn legend(out: &mut String, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 14.0 + 16.0 * i as f64;
        let x = W - RIGHT - 170.0;
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="1.6"{dash}/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            x + 24.0,
            s.color,
            x + 30.0,
            y + 4.0,
            escape(s.label)
        );
    }
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let xs = series.iter().flat_map(|s| s.x.iter().copied());
    let ys = series.iter().flat_map(|s| s.y.iter().copied());
    let f = Frame::fit(xs, ys);
    let mut out = String::new();
    axes(&mut out, &f, title, xlabel, ylabel);
    for s in series {
        polyline(&mut out, &f, s);
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

pub fn histogram(title: &str, xlabel: &str, ylabel: &str, bars: &Bars, curves: &[Series]) -> String {
    let xs = bars.edges.iter().copied();
    let ys = bars
        .heights
        .iter()
        .copied()
        .chain(curves.iter().flat_map(|s| s.y.iter().copied()))
        .chain(std::iter::once(0.0));
    let mut f = Frame::fit(xs, ys);
    f.y0 = 0.0;
    let mut out = String::new();
    axes(&mut out, &f, title, xlabel, ylabel);
    for (i, h) in bars.heights.iter().enumerate() {
        let (a, b) = (f.px(bars.edges[i]), f.px(bars.edges[i + 1]));
        let top = f.py(*h);
        let _ = writeln!(
            out,
            r##"<rect x="{a:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#9db4d6" stroke="#4a6a99" stroke-width="0.5"/>"##,
            (b - a).max(0.0),
            (f.py(0.0) - top).max(0.0)
        );
    }
    for s in curves {
        polyline(&mut out, &f, s);
    }
    legend(&mut out, curves);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_self_contained() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 0.5, 0.25];
        let svg = line_chart(
            "t <1>",
            "x",
            "y",
            &[Series {
                label: "a&b",
                x: &x,
                y: &y,
                color: "black",
                dashed: false,
            }],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href"));
        assert!(svg.contains("t &lt;1&gt;") && svg.contains("a&amp;b"));

        let svg = histogram(
            "h",
            "s",
            "P(s)",
            &Bars {
                edges: &[0.0, 1.0, 2.0],
                heights: &[0.6, 0.4],
            },
            &[],
        );
        assert_eq!(svg.matches("<rect").count(), 2 + 2);
    }
}
