//! Standalone SVG 1.1 figures with fixed number formatting, so identical
//! input renders to identical bytes.

use std::fmt::Write;

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 280.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 44.0;

/// One scatter panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<[f64; 2]>,
}

/// Affine map from data coordinates to a panel's plotting area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Plot area `(left, top, width, height)` in pixels.
    pub area: (f64, f64, f64, f64),
}

impl Frame {
    /// Frame of the panel at grid position `(row, col)` fitted to `points`.
    pub fn for_points(points: &[[f64; 2]], row: usize, col: usize) -> Self {
        let left = col as f64 * PANEL_W + MARGIN_L;
        let top = row as f64 * PANEL_H + MARGIN_T;
        Self {
            x_range: padded_range(points.iter().map(|p| p[0])),
            y_range: padded_range(points.iter().map(|p| p[1])),
            area: (left, top, PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B),
        }
    }

    pub fn to_px(&self, p: [f64; 2]) -> (f64, f64) {
        let (l, t, w, h) = self.area;
        let fx = (p[0] - self.x_range.0) / (self.x_range.1 - self.x_range.0);
        let fy = (p[1] - self.y_range.0) / (self.y_range.1 - self.y_range.0);
        (l + fx * w, t + h - fy * h)
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, extra: &str, s: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.3}" y="{y:.3}" text-anchor="{anchor}"{extra}>{}</text>"#,
        escape(s)
    );
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

/// Scatter panels laid out in rows of `columns`; an empty panel shows its
/// axes and an "Empty" note.
pub fn render_scatter_svg(panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let mut out = String::new();
    header(&mut out, columns as f64 * PANEL_W, rows as f64 * PANEL_H);
    for (k, panel) in panels.iter().enumerate() {
        let frame = Frame::for_points(&panel.points, k / columns, k % columns);
        let (l, t, w, h) = frame.area;
        let _ = writeln!(out, r#"<g class="panel">"#);
        let _ = writeln!(
            out,
            r#"<rect x="{l:.3}" y="{t:.3}" width="{w:.3}" height="{h:.3}" fill="none" stroke="black"/>"#
        );
        text(&mut out, l + w / 2.0, t - 10.0, "middle", r#" font-weight="bold""#, &panel.title);
        text(&mut out, l + w / 2.0, t + h + 34.0, "middle", "", &panel.x_label);
        let (yx, yy) = (l - 42.0, t + h / 2.0);
        text(
            &mut out,
            yx,
            yy,
            "middle",
            &format!(r#" transform="rotate(-90 {yx:.3} {yy:.3})""#),
            &panel.y_label,
        );
        text(&mut out, l, t + h + 16.0, "start", "", &tick(frame.x_range.0));
        text(&mut out, l + w, t + h + 16.0, "end", "", &tick(frame.x_range.1));
        text(&mut out, l - 4.0, t + h, "end", "", &tick(frame.y_range.0));
        text(&mut out, l - 4.0, t + 10.0, "end", "", &tick(frame.y_range.1));
        if panel.points.is_empty() {
            text(&mut out, l + w / 2.0, t + h / 2.0, "middle", r#" fill="gray""#, "Empty");
        }
        for p in &panel.points {
            let (x, y) = frame.to_px(*p);
            let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="1.2" fill="black"/>"#);
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

fn gray(p: f64) -> u8 {
    (255.0 * (1.0 - p.clamp(0.0, 1.0))).round() as u8
}

/// Proportion field `values[i][j]` at `(eps1[i], eps2[j])`, white for 0 and
/// black for 1, with `eps1` along the horizontal axis.
pub fn render_heatmap_svg(eps1: &[f64], eps2: &[f64], values: &[Vec<f64>]) -> String {
    let cell = 36.0;
    let (left, top) = (70.0, 40.0);
    let (w, h) = (eps1.len() as f64 * cell, eps2.len() as f64 * cell);
    let legend_x = left + w + 30.0;
    let mut out = String::new();
    header(&mut out, legend_x + 70.0, top + h + 60.0);
    text(&mut out, left + w / 2.0, 24.0, "middle", r#" font-weight="bold""#, "Proportion of empty sections");
    for (i, row) in values.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            let x = left + i as f64 * cell;
            let y = top + h - (j + 1) as f64 * cell;
            let g = gray(p);
            let _ = writeln!(
                out,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{cell:.3}" height="{cell:.3}" fill="rgb({g},{g},{g})"><title>eps1={} eps2={} p={:.4}</title></rect>"#,
                eps1[i], eps2[j], p
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<rect x="{left:.3}" y="{top:.3}" width="{w:.3}" height="{h:.3}" fill="none" stroke="black"/>"#
    );
    for (i, e) in eps1.iter().enumerate() {
        text(&mut out, left + (i as f64 + 0.5) * cell, top + h + 16.0, "middle", "", &format!("{e}"));
    }
    for (j, e) in eps2.iter().enumerate() {
        text(&mut out, left - 6.0, top + h - (j as f64 + 0.5) * cell + 4.0, "end", "", &format!("{e}"));
    }
    text(&mut out, left + w / 2.0, top + h + 40.0, "middle", "", "eps1");
    let (yx, yy) = (left - 46.0, top + h / 2.0);
    text(&mut out, yx, yy, "middle", &format!(r#" transform="rotate(-90 {yx:.3} {yy:.3})""#), "eps2");
    let steps = 10;
    let lh = h.max(cell * 2.0) / steps as f64;
    for s in 0..steps {
        let p = (s as f64 + 0.5) / steps as f64;
        let g = gray(p);
        let y = top + (steps - 1 - s) as f64 * lh;
        let _ = writeln!(
            out,
            r#"<rect x="{legend_x:.3}" y="{y:.3}" width="16" height="{lh:.3}" fill="rgb({g},{g},{g})"/>"#
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{legend_x:.3}" y="{top:.3}" width="16" height="{:.3}" fill="none" stroke="black"/>"#,
        lh * steps as f64
    );
    text(&mut out, legend_x + 20.0, top + 10.0, "start", "", "1");
    text(&mut out, legend_x + 20.0, top + lh * steps as f64, "start", "", "0");
    out.push_str("</svg>\n");
    out
}

/// Bar chart of the mean proportion per `eps1` column.
pub fn render_marginal_svg(eps1: &[f64], marginal: &[f64]) -> String {
    let bar = 36.0;
    let (left, top, h) = (60.0, 40.0, 220.0);
    let w = eps1.len() as f64 * bar;
    let mut out = String::new();
    header(&mut out, left + w + 20.0, top + h + 60.0);
    text(&mut out, left + w / 2.0, 24.0, "middle", r#" font-weight="bold""#, "Mean proportion over eps2");
    for (i, &m) in marginal.iter().enumerate() {
        let bh = m.clamp(0.0, 1.0) * h;
        let x = left + i as f64 * bar + 4.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.3}" y="{:.3}" width="{:.3}" height="{bh:.3}" fill="black"><title>eps1={} mean={m:.4}</title></rect>"#,
            top + h - bh,
            bar - 8.0,
            eps1[i]
        );
        text(&mut out, left + (i as f64 + 0.5) * bar, top + h + 16.0, "middle", "", &format!("{}", eps1[i]));
    }
    let _ = writeln!(
        out,
        r#"<path d="M {left:.3} {top:.3} L {left:.3} {:.3} L {:.3} {:.3}" fill="none" stroke="black"/>"#,
        top + h,
        left + w,
        top + h
    );
    for v in [0.0, 0.5, 1.0] {
        text(&mut out, left - 6.0, top + h - v * h + 4.0, "end", "", &format!("{v:.1}"));
    }
    text(&mut out, left + w / 2.0, top + h + 40.0, "middle", "", "eps1");
    out.push_str("</svg>\n");
    out
}
