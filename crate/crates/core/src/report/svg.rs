//! Minimal self-contained SVG charts. Output depends only on the inputs, so
//! re-running a command reproduces the same bytes.

use std::fmt::Write;

const WIDTH: f64 = 780.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// XML comment body; `--` is not allowed inside one.
fn comment(s: &str) -> String {
    s.replace("--", "- -")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = bounds(xs, 0.0);
        let (y0, y1) = bounds(ys, 0.05);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn bounds(v: impl Iterator<Item = f64>, margin: f64) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
            (l.min(x), h.max(x))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0) * 1e-3;
        return (lo - pad, hi + pad);
    }
    let pad = margin * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e5).contains(&a) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

fn header(out: &mut String, meta: &str, title: &str) {
    let _ = writeln!(out, "<!--\n{}\n-->", comment(meta));
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, x_ticks: bool) {
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{l:.1},{t:.1} L{l:.1},{b:.1} L{r:.1},{b:.1}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let y = f.y0 + (f.y1 - f.y0) * k as f64 / 4.0;
        let py = f.py(y);
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{py:.1}" x2="{l:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            l - 5.0,
            l - 8.0,
            py + 4.0,
            tick_label(y)
        );
        if x_ticks {
            let x = f.x0 + (f.x1 - f.x0) * k as f64 / 4.0;
            let px = f.px(x);
            let _ = writeln!(
                out,
                r#"<line x1="{px:.1}" y1="{b:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                b + 5.0,
                b + 18.0,
                tick_label(x)
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(18,{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, names: &[&str]) {
    let x = WIDTH - RIGHT + 15.0;
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            x + 18.0,
            y,
            escape(name)
        );
    }
}

/// Line chart; non-finite points break the line.
pub fn line_chart(meta: &str, title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = || series.iter().flat_map(|s| s.points.iter());
    let f = Frame::new(pts().map(|p| p.0), pts().filter(|p| p.1.is_finite()).map(|p| p.1));
    let mut out = String::new();
    header(&mut out, meta, title);
    axes(&mut out, &f, x_label, y_label, true);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            if !y.is_finite() {
                pen_down = false;
                continue;
            }
            let _ = write!(
                d,
                "{}{:.2},{:.2} ",
                if pen_down { "L" } else { "M" },
                f.px(x),
                f.py(y)
            );
            pen_down = true;
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                f.px(x),
                f.py(y)
            );
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
    }
    legend(
        &mut out,
        &series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(),
    );
    out.push_str("</svg>\n");
    out
}

/// Grouped bars: one group per label, one bar per series inside each group.
/// Non-finite values are drawn as a marker labelled "infeasible".
pub fn grouped_bars(
    meta: &str,
    title: &str,
    y_label: &str,
    groups: &[String],
    series: &[(String, Vec<f64>)],
) -> String {
    let finite = || {
        series
            .iter()
            .flat_map(|s| s.1.iter().copied())
            .filter(|v| v.is_finite())
    };
    let (_, hi) = bounds(finite().chain(std::iter::once(0.0)), 0.05);
    let lo = finite().fold(0.0f64, f64::min);
    let f = Frame {
        x0: 0.0,
        x1: groups.len().max(1) as f64,
        y0: lo,
        y1: hi,
    };
    let mut out = String::new();
    header(&mut out, meta, title);
    axes(&mut out, &f, "", y_label, false);
    let slot = 1.0 / (series.len() as f64 + 1.0);
    for (g, label) in groups.iter().enumerate() {
        let cx = f.px(g as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 18.0,
            escape(label)
        );
        for (k, (_, values)) in series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let x = g as f64 + slot * (k as f64 + 0.5);
            let (px0, px1) = (f.px(x), f.px(x + slot));
            match values.get(g).copied() {
                Some(v) if v.is_finite() => {
                    let (top, base) = (f.py(v.max(0.0)), f.py(v.min(0.0)));
                    let _ = writeln!(
                        out,
                        r#"<rect x="{px0:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                        px1 - px0,
                        base - top
                    );
                }
                Some(_) => {
                    let _ = writeln!(
                        out,
                        r#"<text x="{:.2}" y="{:.1}" text-anchor="middle" fill="{color}">infeasible</text>"#,
                        (px0 + px1) / 2.0,
                        TOP + 12.0
                    );
                }
                None => {}
            }
        }
    }
    legend(&mut out, &series.iter().map(|s| s.0.as_str()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Single-series bar chart.
pub fn bar_chart(meta: &str, title: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let groups: Vec<String> = bars.iter().map(|b| b.0.clone()).collect();
    let series = vec![(y_label.to_string(), bars.iter().map(|b| b.1).collect())];
    grouped_bars(meta, title, y_label, &groups, &series)
}

fn shade(t: f64) -> String {
    // light yellow (low) to dark blue (high)
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(255.0, 8.0),
        lerp(247.0, 48.0),
        lerp(188.0, 107.0)
    )
}

/// Heatmap of `z[i][j]` over `(xs[j], ys[i])` with marching-squares iso-lines.
#[allow(clippy::too_many_arguments)]
pub fn contour(
    meta: &str,
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    ys: &[f64],
    z: &[Vec<f64>],
    levels: usize,
) -> String {
    let f = Frame {
        x0: xs[0],
        x1: if xs.len() > 1 {
            xs[xs.len() - 1]
        } else {
            xs[0] + 1.0
        },
        y0: ys[0],
        y1: if ys.len() > 1 {
            ys[ys.len() - 1]
        } else {
            ys[0] + 1.0
        },
    };
    let finite = || z.iter().flatten().copied().filter(|v| v.is_finite());
    let zlo = finite().fold(f64::INFINITY, f64::min);
    let zhi = finite().fold(f64::NEG_INFINITY, f64::max);
    let span = if zhi > zlo { zhi - zlo } else { 1.0 };
    let mut out = String::new();
    header(&mut out, meta, title);

    // cell edges halfway between grid points
    let edges = |v: &[f64], i: usize| -> (f64, f64) {
        let lo = if i == 0 { v[0] } else { 0.5 * (v[i - 1] + v[i]) };
        let hi = if i + 1 == v.len() {
            if v.len() > 1 {
                v[i]
            } else {
                v[i] + 1.0
            }
        } else {
            0.5 * (v[i] + v[i + 1])
        };
        (lo, hi)
    };
    for (i, row) in z.iter().enumerate() {
        let (y0, y1) = edges(ys, i);
        for (j, &v) in row.iter().enumerate() {
            let (x0, x1) = edges(xs, j);
            let fill = if v.is_finite() {
                shade((v - zlo) / span)
            } else {
                "#555555".into()
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="{fill}" stroke-width="0.6"/>"#,
                f.px(x0),
                f.py(y1),
                f.px(x1) - f.px(x0),
                f.py(y0) - f.py(y1)
            );
        }
    }

    let mut d = String::new();
    for k in 1..levels {
        let level = zlo + span * k as f64 / levels as f64;
        for i in 0..ys.len().saturating_sub(1) {
            for j in 0..xs.len().saturating_sub(1) {
                let c = [
                    (xs[j], ys[i], z[i][j]),
                    (xs[j + 1], ys[i], z[i][j + 1]),
                    (xs[j + 1], ys[i + 1], z[i + 1][j + 1]),
                    (xs[j], ys[i + 1], z[i + 1][j]),
                ];
                if c.iter().any(|p| !p.2.is_finite()) {
                    continue;
                }
                let mut hits = Vec::with_capacity(4);
                for e in 0..4 {
                    let (a, b) = (c[e], c[(e + 1) % 4]);
                    if (a.2 < level) != (b.2 < level) {
                        let t = (level - a.2) / (b.2 - a.2);
                        hits.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
                    }
                }
                for pair in hits.chunks_exact(2) {
                    let _ = write!(
                        d,
                        "M{:.2},{:.2} L{:.2},{:.2} ",
                        f.px(pair[0].0),
                        f.py(pair[0].1),
                        f.px(pair[1].0),
                        f.py(pair[1].1)
                    );
                }
            }
        }
    }
    if !d.is_empty() {
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="black" stroke-width="0.8"/>"#,
            d.trim_end()
        );
    }
    axes(&mut out, &f, x_label, y_label, true);

    // colour scale
    let x = WIDTH - RIGHT + 25.0;
    for k in 0..20 {
        let t = k as f64 / 19.0;
        let y = HEIGHT - BOTTOM - (HEIGHT - TOP - BOTTOM) * (k as f64 + 1.0) / 20.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{y:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            (HEIGHT - TOP - BOTTOM) / 20.0 + 0.5,
            shade(t)
        );
    }
    for (t, v) in [(0.0, zlo), (1.0, zhi)] {
        let y = HEIGHT - BOTTOM - (HEIGHT - TOP - BOTTOM) * t;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            x + 24.0,
            y + 4.0,
            tick_label(v)
        );
    }
    out.push_str("</svg>\n");
    out
}
