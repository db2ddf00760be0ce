//! Static line plots with a logarithmic time axis.

use std::fmt::Write;

use crate::csvio::fmt;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let (lo, hi) = values
            .map(|v| if log { v.log10() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            return None;
        }
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Some(Self { log, lo, hi })
    }

    /// Position in [0, 1].
    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            (self.lo.ceil() as i32..=self.hi.floor() as i32)
                .map(|k| (10f64.powi(k), format!("1e{k}")))
                .collect()
        } else {
            (0..=4)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * f64::from(i) / 4.0;
                    (v, format!("{v:.3}"))
                })
                .collect()
        }
    }
}

impl Plot {
    pub fn render(&self) -> String {
        let usable = |&(x, y): &(f64, f64)| {
            x > 0.0 && x.is_finite() && y.is_finite() && (!self.log_y || y > 0.0)
        };
        let points = || self.series.iter().flat_map(|s| s.1.iter().copied()).filter(usable);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (Some(xa), Some(ya)) = (
            Axis::fit(points().map(|p| p.0), true),
            Axis::fit(points().map(|p| p.1), self.log_y),
        ) else {
            out.push_str("</svg>\n");
            return out;
        };
        let px = |x: f64| MARGIN + xa.unit(x) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - ya.unit(y) * (HEIGHT - 2.0 * MARGIN);
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        for (v, label) in xa.ticks() {
            let x = fmt(px(v));
            let _ = writeln!(
                out,
                r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle" font-size="11">{label}</text>"#,
                HEIGHT - MARGIN,
                HEIGHT - MARGIN + 5.0,
                HEIGHT - MARGIN + 18.0
            );
        }
        for (v, label) in ya.ticks() {
            let y = fmt(py(v));
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{y}" x2="{MARGIN}" y2="{y}" stroke="black"/><text x="{}" y="{y}" text-anchor="end" font-size="11">{label}</text>"#,
                MARGIN - 5.0,
                MARGIN - 8.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="15" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 15 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (i, (name, pts)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let coords: Vec<String> = pts
                .iter()
                .filter(|p| usable(p))
                .map(|&(x, y)| format!("{},{}", fmt(px(x)), fmt(py(y))))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
                coords.join(" "),
                escape(name)
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="10" fill="{color}">{}</text>"#,
                WIDTH - MARGIN + 4.0,
                MARGIN + 12.0 * i as f64,
                escape(name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
