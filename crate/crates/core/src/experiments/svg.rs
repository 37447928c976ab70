//! Minimal SVG line and scatter plots for run artifacts.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let range = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo <= 1e-300 * lo.abs().max(1.0) {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = range(&mut xs.clone());
        let (y0, y1) = range(&mut ys.clone());
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str, ax: &Axes) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    for (v, anchor, x, y) in [
        (ax.x0, "start", MARGIN, H - MARGIN + 16.0),
        (ax.x1, "end", W - MARGIN, H - MARGIN + 16.0),
    ] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{}</text>"#, tick(v));
    }
    for (v, y) in [(ax.y0, H - MARGIN), (ax.y1, MARGIN + 10.0)] {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, MARGIN - 4.0, tick(v));
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of several series against a shared abscissa. With `log_y`
/// the ordinate is `log10` of the absolute values (non-positive values dropped).
pub fn line_plot(title: &str, xlabel: &str, x: &[f64], series: &[(&str, &[f64])], log_y: bool) -> String {
    let tf = |v: f64| if log_y { if v.abs() > 0.0 { v.abs().log10() } else { f64::NAN } } else { v };
    let ys: Vec<Vec<f64>> = series.iter().map(|(_, s)| s.iter().map(|&v| tf(v)).collect()).collect();
    let ax = Axes::fit(x.iter().copied(), ys.iter().flatten().copied());
    let mut out = String::new();
    header(&mut out, title, xlabel, if log_y { "log10 |value|" } else { "value" }, &ax);
    for (i, ((name, _), y)) in series.iter().zip(&ys).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        let mut pen_up = true;
        for (&xv, &yv) in x.iter().zip(y) {
            if !yv.is_finite() {
                pen_up = true;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, ax.px(xv), ax.py(yv));
            pen_up = false;
        }
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - MARGIN - 4.0,
            MARGIN + 16.0 + 14.0 * i as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter plot of complex points, e.g. a spectrum.
pub fn scatter_plot(title: &str, points: &[(f64, f64)]) -> String {
    let ax = Axes::fit(points.iter().map(|p| p.0), points.iter().map(|p| p.1));
    let mut out = String::new();
    header(&mut out, title, "Re", "Im", &ax);
    for &(x, y) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}"/>"#, ax.px(x), ax.py(y), COLORS[0]);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed() {
        let x = [0.0, 1.0, 2.0];
        let s = line_plot("t<1", "t", &x, &[("L2", &[1.0, 0.5, 0.25]), ("zero", &[0.0, 0.0, 0.0])], true);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("t&lt;1"));
        assert_eq!(s.matches("<path").count(), 2);
        let sc = scatter_plot("spectrum", &[(1.0, 2.0), (1.0, -2.0)]);
        assert_eq!(sc.matches("<circle").count(), 2);
    }
}
