//! Minimal static SVG line plots.

use std::fmt::Write as _;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, color: &'static str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            color,
            points,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HLine {
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y_scale: Scale,
    pub series: Vec<Series>,
    pub hlines: Vec<HLine>,
}

impl Panel {
    pub fn new(title: impl Into<String>, x_label: &str, y_label: &str, y_scale: Scale) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            y_scale,
            series: Vec::new(),
            hlines: Vec::new(),
        }
    }

    pub fn series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn hline(mut self, y: f64, label: impl Into<String>) -> Self {
        self.hlines.push(HLine {
            y,
            label: label.into(),
        });
        self
    }
}

/// Reduces `points` to at most `2 * buckets` points, keeping the smallest and
/// largest `y` of each bucket of consecutive points in their original order.
pub fn thin(points: &[(f64, f64)], buckets: usize) -> Vec<(f64, f64)> {
    if points.len() <= 2 * buckets || buckets == 0 {
        return points.to_vec();
    }
    let per = points.len().div_ceil(buckets);
    let mut out = Vec::with_capacity(2 * buckets);
    for chunk in points.chunks(per) {
        let (mut lo, mut hi) = (0, 0);
        for (k, p) in chunk.iter().enumerate() {
            if p.1 < chunk[lo].1 {
                lo = k;
            }
            if p.1 > chunk[hi].1 {
                hi = k;
            }
        }
        let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        out.push(chunk[a]);
        if b != a {
            out.push(chunk[b]);
        }
    }
    out
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn fmt_tick(v: f64, step: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.abs() >= 1e5 || v.abs() < 1e-3 {
        return format!("{v:.1e}");
    }
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

struct Axis {
    lo: f64,
    hi: f64,
    scale: Scale,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => (v - self.lo) / (self.hi - self.lo),
            Scale::Log10 => (v.log10() - self.lo) / (self.hi - self.lo),
        }
    }

    fn fit(values: impl Iterator<Item = f64>, scale: Scale) -> Self {
        let usable = values.filter(|v| v.is_finite() && (scale == Scale::Linear || *v > 0.0));
        let (mut lo, mut hi) = usable.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if !lo.is_finite() {
            (lo, hi) = match scale {
                Scale::Linear => (0.0, 1.0),
                Scale::Log10 => (1e-16, 1.0),
            };
        }
        match scale {
            Scale::Linear => {
                if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                    let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
                    return Self {
                        lo: lo - pad,
                        hi: hi + pad,
                        scale,
                    };
                }
                let pad = 0.05 * (hi - lo);
                Self {
                    lo: lo - pad,
                    hi: hi + pad,
                    scale,
                }
            }
            Scale::Log10 => {
                let lo = lo.log10().floor();
                let hi = hi.log10().ceil().max(lo + 1.0);
                Self { lo, hi, scale }
            }
        }
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        match self.scale {
            Scale::Linear => {
                let step = nice_step(self.hi - self.lo, 5);
                let mut v = (self.lo / step).ceil() * step;
                let mut out = Vec::new();
                while v <= self.hi + 1e-9 * step {
                    out.push((v, fmt_tick(v, step)));
                    v += step;
                }
                out
            }
            Scale::Log10 => {
                let decades = (self.hi - self.lo) as i32;
                let every = (decades / 8).max(1);
                (self.lo as i32..=self.hi as i32)
                    .filter(|e| (e - self.lo as i32) % every == 0)
                    .map(|e| (10f64.powi(e), format!("1e{e}")))
                    .collect()
            }
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn render_panel(out: &mut String, panel: &Panel, x0: f64, y0: f64, w: f64, h: f64) {
    let (left, right, top, bottom) = (62.0, 12.0, 26.0, 40.0);
    let (px, py) = (x0 + left, y0 + top);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let xs = Axis::fit(
        panel
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0)),
        Scale::Linear,
    );
    let ys = Axis::fit(
        panel
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(panel.hlines.iter().map(|l| l.y)),
        panel.y_scale,
    );
    let sx = |v: f64| px + pw * xs.map(v);
    let sy = |v: f64| py + ph * (1.0 - ys.map(v));

    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle" font-weight="bold">{}</text>"#,
        px + pw / 2.0,
        y0 + 16.0,
        escape(&panel.title)
    )
    .unwrap();
    writeln!(
        out,
        r##"<rect x="{px:.1}" y="{py:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#333"/>"##
    )
    .unwrap();

    for (v, label) in xs.ticks() {
        let x = sx(v);
        writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#333"/><text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{label}</text>"##,
            py + ph,
            py + ph + 4.0,
            py + ph + 15.0
        )
        .unwrap();
    }
    for (v, label) in ys.ticks() {
        let y = sy(v);
        writeln!(
            out,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{px:.1}" y2="{y:.1}" stroke="#333"/><line x1="{px:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{label}</text>"##,
            px - 4.0,
            px + pw,
            px - 6.0,
            y + 3.5
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
        px + pw / 2.0,
        y0 + h - 6.0,
        escape(&panel.x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        x0 + 14.0,
        py + ph / 2.0,
        x0 + 14.0,
        py + ph / 2.0,
        escape(&panel.y_label)
    )
    .unwrap();

    writeln!(
        out,
        r#"<clipPath id="c{:.0}_{:.0}"><rect x="{px:.1}" y="{py:.1}" width="{pw:.1}" height="{ph:.1}"/></clipPath><g clip-path="url(#c{:.0}_{:.0})">"#,
        x0, y0, x0, y0
    )
    .unwrap();
    for s in &panel.series {
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() || (panel.y_scale == Scale::Log10 && y <= 0.0) {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            write!(path, "{cmd}{:.2} {:.2}", sx(x), sy(y)).unwrap();
            pen_down = true;
        }
        writeln!(
            out,
            r#"<path d="{path}" fill="none" stroke="{}" stroke-width="1"/>"#,
            s.color
        )
        .unwrap();
    }
    for l in &panel.hlines {
        let y = sy(l.y);
        writeln!(
            out,
            r##"<line x1="{px:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#000" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"##,
            px + pw,
            px + pw - 4.0,
            y - 4.0,
            escape(&l.label)
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();

    for (k, s) in panel.series.iter().enumerate() {
        let ly = py + 12.0 + 13.0 * k as f64;
        writeln!(
            out,
            r##"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="10">{}</text>"##,
            px + 8.0,
            px + 24.0,
            s.color,
            px + 28.0,
            ly + 3.5,
            escape(&s.label)
        )
        .unwrap();
    }
}

/// Lays `panels` out on a `cols`-column grid inside an 800x600 view box.
pub fn render_figure(title: &str, panels: &[Panel], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols).max(1);
    let head = 24.0;
    let cell_w = WIDTH / cols as f64;
    let cell_h = (HEIGHT - head) / rows as f64;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="17" font-size="15" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    for (k, panel) in panels.iter().enumerate() {
        let (r, c) = (k / cols, k % cols);
        render_panel(
            &mut out,
            panel,
            c as f64 * cell_w,
            head + r as f64 * cell_h,
            cell_w,
            cell_h,
        );
    }
    writeln!(out, "</svg>").unwrap();
    out
}
