//! Hand-written SVG for the two plot kinds. Coordinates are printed with two
//! decimals so output is byte-stable.

use std::fmt::Write as _;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 340.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 40.0;
const PALETTE: [&str; 6] = [
    "#3b6ea5", "#d1793b", "#4f9a55", "#b8444a", "#7d62a8", "#8a7160",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = if self.x1 > self.x0 {
            self.x1 - self.x0
        } else {
            1.0
        };
        LEFT + (v - self.x0) / span * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="18" font-size="13">{}</text>"#,
        escape(title)
    );
}

fn y_axis(out: &mut String, f: &Frame, ticks: &[f64]) {
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{:.2}" x2="{LEFT:.2}" y2="{:.2}" stroke="#444"/>"##,
        TOP,
        HEIGHT - BOTTOM
    );
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#444"/>"##,
        HEIGHT - BOTTOM,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM
    );
    for &t in ticks {
        let y = f.y(t);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{t:.2}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
}

/// Line plot of a similarity series (value `i` belongs to boundary `i + 1`)
/// with the threshold dashed and chosen boundaries marked.
pub fn series_plot(title: &str, values: &[f64], threshold: f64, boundaries: &[usize]) -> String {
    let lo = values.iter().copied().fold(threshold.min(0.0), f64::min);
    let hi = values.iter().copied().fold(threshold.max(1.0), f64::max);
    let f = Frame {
        x0: 1.0,
        x1: values.len() as f64,
        y0: lo,
        y1: if hi > lo { hi } else { lo + 1.0 },
    };
    let mut out = String::new();
    open(&mut out, title);
    y_axis(&mut out, &f, &[f.y0, (f.y0 + f.y1) / 2.0, f.y1]);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">boundary</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 8.0
    );
    for &b in boundaries.iter().filter(|&&b| b >= 1 && b <= values.len()) {
        let x = f.x(b as f64);
        let _ = writeln!(
            out,
            r##"<line class="boundary" x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#b8444a" stroke-width="1"/>"##,
            HEIGHT - BOTTOM
        );
    }
    let ty = f.y(threshold);
    let _ = writeln!(
        out,
        r##"<line class="threshold" x1="{LEFT:.2}" y1="{ty:.2}" x2="{:.2}" y2="{ty:.2}" stroke="#888" stroke-dasharray="5,4"/>"##,
        WIDTH - RIGHT
    );
    let points: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{:.2},{:.2}", f.x((i + 1) as f64), f.y(v)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline class="series" fill="none" stroke="#3b6ea5" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

/// Bars grouped by dataset, one colour per segmenter. `values[s][d]` is the
/// score of segmenter `s` on dataset `d`, if evaluated.
pub fn grouped_bars(
    title: &str,
    datasets: &[String],
    segmenters: &[String],
    values: &[Vec<Option<f64>>],
) -> String {
    let f = Frame {
        x0: 0.0,
        x1: datasets.len() as f64,
        y0: 0.0,
        y1: 1.0,
    };
    let mut out = String::new();
    open(&mut out, title);
    y_axis(&mut out, &f, &[0.0, 0.25, 0.5, 0.75, 1.0]);
    let group = f.x(1.0) - f.x(0.0);
    let bar = group * 0.8 / segmenters.len().max(1) as f64;
    for (d, name) in datasets.iter().enumerate() {
        let gx = f.x(d as f64) + group * 0.1;
        for (s, row) in values.iter().enumerate() {
            let Some(v) = row[d] else { continue };
            let v = v.clamp(0.0, 1.0);
            let y = f.y(v);
            let _ = writeln!(
                out,
                r#"<rect class="bar" x="{:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{} {}: {v:.4}</title></rect>"#,
                gx + s as f64 * bar,
                bar * 0.9,
                HEIGHT - BOTTOM - y,
                PALETTE[s % PALETTE.len()],
                escape(&segmenters[s]),
                escape(name)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            f.x(d as f64 + 0.5),
            HEIGHT - BOTTOM + 16.0,
            escape(name)
        );
    }
    for (s, name) in segmenters.iter().enumerate() {
        let x = WIDTH - RIGHT - 130.0;
        let y = TOP + 4.0 + s as f64 * 15.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            PALETTE[s % PALETTE.len()],
            x + 14.0,
            y + 9.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}
