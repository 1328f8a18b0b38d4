//! Minimal SVG line and bar charts. Output depends only on the data, so
//! re-rendering the same series gives the same file.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Half-width of a shaded band around each point.
    pub band: Option<Vec<f64>>,
    pub dashed: bool,
}

impl Series {
    pub fn line(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            band: None,
            dashed: false,
        }
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }
    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn draw_panel(svg: &mut String, f: &Frame, title: &str, xlabel: &str, ylabel: &str, series: &[Series]) {
    let _ = writeln!(
        svg,
        r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
        f.x0, f.y0, f.w, f.h
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
        f.x0 + f.w / 2.0,
        f.y0 - 8.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
        f.x0 + f.w / 2.0,
        f.y0 + f.h + 32.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        f.x0 - 40.0,
        f.y0 + f.h / 2.0,
        f.x0 - 40.0,
        f.y0 + f.h / 2.0,
        escape(ylabel)
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.xr.0 + t * (f.xr.1 - f.xr.0);
        let yv = f.yr.0 + t * (f.yr.1 - f.yr.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
            f.px(xv),
            f.y0 + f.h + 14.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
            f.x0 - 4.0,
            f.py(yv) + 3.0,
            tick(yv)
        );
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if let Some(band) = &s.band {
            let upper = s.points.iter().zip(band).map(|(&(x, y), b)| (x, y + b));
            let lower = s.points.iter().zip(band).rev().map(|(&(x, y), b)| (x, y - b));
            let pts: Vec<String> = upper
                .chain(lower)
                .map(|(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                pts.join(" ")
            );
        }
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" fill="{color}">{}</text>"#,
            f.x0 + 6.0,
            f.y0 + 14.0 + 12.0 * i as f64,
            escape(&s.name)
        );
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 {
        format!("{:.0}k", v / 1e3)
    } else if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn frame_for(x0: f64, y0: f64, w: f64, h: f64, series: &[Series]) -> Frame {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let xr = range(all().map(|p| p.0));
    let ys = series.iter().flat_map(|s| {
        let band = s.band.clone().unwrap_or_else(|| vec![0.0; s.points.len()]);
        s.points
            .iter()
            .zip(band)
            .flat_map(|(p, b)| [p.1 - b, p.1 + b])
            .collect::<Vec<_>>()
    });
    Frame {
        x0,
        y0,
        w,
        h,
        xr,
        yr: range(ys),
    }
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">"#
    );
    let f = frame_for(MARGIN + 8.0, 32.0, WIDTH - 2.0 * MARGIN, HEIGHT - 32.0 - MARGIN, series);
    draw_panel(&mut svg, &f, title, xlabel, ylabel, series);
    svg.push_str("</svg>\n");
    svg
}

/// Grid of line panels, `cols` per row.
pub fn panel_grid(panels: &[(String, Vec<Series>)], cols: usize, xlabel: &str, ylabel: &str) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols);
    let (pw, ph) = (320.0, 240.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif">"#,
        pw * cols as f64,
        ph * rows as f64
    );
    for (i, (title, series)) in panels.iter().enumerate() {
        let (r, c) = (i / cols, i % cols);
        let f = frame_for(c as f64 * pw + 60.0, r as f64 * ph + 28.0, pw - 80.0, ph - 76.0, series);
        draw_panel(&mut svg, &f, title, xlabel, ylabel, series);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Bars with error whiskers, one per label.
pub fn bar_chart(title: &str, ylabel: &str, bars: &[(String, f64, f64)]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">"#
    );
    let mut yr = range(bars.iter().flat_map(|(_, m, s)| [m - s, m + s, 0.0]));
    if yr.0 > 0.0 {
        yr.0 = 0.0;
    }
    let f = Frame {
        x0: MARGIN + 8.0,
        y0: 32.0,
        w: WIDTH - 2.0 * MARGIN,
        h: HEIGHT - 32.0 - 2.0 * MARGIN,
        xr: (0.0, bars.len().max(1) as f64),
        yr,
    };
    draw_panel(&mut svg, &f, title, "", ylabel, &[]);
    for (i, (label, mean, std)) in bars.iter().enumerate() {
        let xc = f.px(i as f64 + 0.5);
        let bw = 0.6 * f.w / bars.len().max(1) as f64;
        let (top, base) = (f.py(mean.max(0.0)), f.py(mean.min(0.0)));
        let _ = writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#1f77b4"/>"##,
            xc - bw / 2.0,
            top,
            bw,
            (base - top).max(0.5)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{xc:.1}" y1="{:.1}" x2="{xc:.1}" y2="{:.1}" stroke="#000"/>"##,
            f.py(mean + std),
            f.py(mean - std)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{xc:.1}" y="{:.1}" text-anchor="end" font-size="10" transform="rotate(-35 {xc:.1} {:.1})">{}</text>"#,
            f.y0 + f.h + 14.0,
            f.y0 + f.h + 14.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
