//! CSV text, hand-written SVG plots and checksums.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

/// Hex sha256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Comma-separated table with a header row and LF line endings.
#[derive(Debug, Clone)]
pub struct CsvTable {
    text: String,
    width: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            text,
            width: header.len(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        assert_eq!(cells.len(), self.width, "row width does not match header");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(c.as_ref());
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Shortest round-trip form of an f64: plain decimal between 1e-4 and 1e15,
/// exponent notation outside.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v.is_nan() {
        "nan".into()
    } else if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn line(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            style: Style::Line,
        }
    }

    pub fn markers(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            style: Style::Markers,
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 70.0;
const COLORS: [&str; 4] = ["#1f4e9c", "#c0392b", "#2e8b57", "#7d3c98"];

/// A static x-y plot rendered as SVG polylines and circles.
#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Symmetric ranges around (0, 0) with equal scales on both axes.
    pub origin_centered: bool,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            origin_centered: false,
        }
    }

    pub fn with(mut self, series: Series) -> Self {
        self.series.push(series);
        self
    }

    pub fn centered(mut self) -> Self {
        self.origin_centered = true;
        self
    }

    fn ranges(&self) -> ((f64, f64), (f64, f64)) {
        let finite = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in finite {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return ((-1.0, 1.0), (-1.0, 1.0));
        }
        if self.origin_centered {
            let r = [x0, x1, y0, y1].iter().fold(0f64, |m, v| m.max(v.abs()));
            let r = if r > 0.0 { r * 1.05 } else { 1.0 };
            return ((-r, r), (-r, r));
        }
        let pad = |lo: f64, hi: f64| {
            if hi > lo {
                let d = (hi - lo) * 0.05;
                (lo - d, hi + d)
            } else {
                let d = lo.abs().max(1.0) * 0.5;
                (lo - d, hi + d)
            }
        };
        (pad(x0, x1), pad(y0, y1))
    }

    pub fn to_svg(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.ranges();
        let (pw, ph) = if self.origin_centered {
            let side = (WIDTH - 2.0 * MARGIN).min(HEIGHT - 2.0 * MARGIN);
            (side, side)
        } else {
            (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN)
        };
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN + ph - (y - y0) / (y1 - y0) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            MARGIN / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );

        for i in 0..=4 {
            let f = f64::from(i) / 4.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let (px, py) = (sx(xv), sy(yv));
            let _ = writeln!(
                out,
                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                MARGIN + ph,
                MARGIN + ph + 5.0,
                MARGIN + ph + 20.0,
                tick(xv)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN - 5.0,
                MARGIN - 8.0,
                py + 4.0,
                tick(yv)
            );
        }
        if x0 < 0.0 && x1 > 0.0 {
            let _ = writeln!(
                out,
                r##"<line x1="{0:.2}" y1="{MARGIN}" x2="{0:.2}" y2="{1:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
                sx(0.0),
                MARGIN + ph
            );
        }
        if y0 < 0.0 && y1 > 0.0 {
            let _ = writeln!(
                out,
                r##"<line x1="{MARGIN}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
                sy(0.0),
                MARGIN + pw
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN + pw / 2.0,
            MARGIN + ph + 45.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{0:.2}" text-anchor="middle" transform="rotate(-90 18 {0:.2})">{1}</text>"#,
            MARGIN + ph / 2.0,
            escape(&self.y_label)
        );

        for (idx, s) in self.series.iter().enumerate() {
            let color = COLORS[idx % COLORS.len()];
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| (sx(x), sy(y)))
                .collect();
            match s.style {
                Style::Line => {
                    let mut attr = String::new();
                    for (x, y) in &pts {
                        let _ = write!(attr, "{x:.2},{y:.2} ");
                    }
                    let _ = writeln!(
                        out,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                        attr.trim_end()
                    );
                }
                Style::Markers => {
                    for (x, y) in &pts {
                        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
                    }
                }
            }
            let ly = MARGIN + 16.0 * (idx as f64 + 1.0);
            let lx = MARGIN + pw + 8.0;
            let _ = writeln!(
                out,
                r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
                ly - 9.0,
                lx + 14.0,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.into()
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
