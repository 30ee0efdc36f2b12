//! Static, self-contained SVG line plots.
//!
//! Panels sit side by side. Coordinates are printed with fixed precision so
//! identical data yields identical bytes.

use std::fmt::Write;

const PANEL_W: f64 = 380.0;
const PANEL_H: f64 = 300.0;
const LEFT: f64 = 62.0;
const RIGHT: f64 = 14.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 46.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

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
    /// Symmetric vertical error bars, one per point.
    pub errors: Option<Vec<f64>>,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, style: Style::Line, errors: None }
    }

    pub fn markers(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, style: Style::Markers, errors: None }
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Self {
        self.errors = Some(errors);
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Dashed vertical marker, e.g. the interpolation threshold.
    pub marker_x: Option<f64>,
}

impl Panel {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Self::default() }
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            let pad = if log { 0.5 } else { 0.5 * lo.abs().max(1.0) };
            (lo, hi) = (lo - pad, hi + pad);
        }
        if log {
            (lo, hi) = (lo.floor(), hi.ceil());
        } else {
            let pad = 0.04 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    fn map(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let span = (self.hi - self.lo).round() as i64;
            let stride = (span / 6 + 1).max(1);
            (self.lo as i64..=self.hi as i64)
                .filter(|e| (e - self.lo as i64) % stride == 0)
                .map(|e| ((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
            let mut out = Vec::new();
            let mut k = (self.lo / step).ceil();
            while k * step <= self.hi + 1e-9 * step {
                let v = k * step;
                out.push(((v - self.lo) / (self.hi - self.lo), tick_label(v, step)));
                k += 1.0;
            }
            out
        }
    }
}

fn tick_label(v: f64, step: f64) -> String {
    if v.abs() < 1e-9 * step {
        return "0".into();
    }
    if v.abs() >= 1e5 || step < 1e-3 {
        return format!("{v:.1e}");
    }
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_panel(out: &mut String, panel: &Panel, x0: f64) {
    let w = PANEL_W - LEFT - RIGHT;
    let h = PANEL_H - TOP - BOTTOM;
    let (left, top) = (x0 + LEFT, TOP);
    let all = || panel.series.iter().flat_map(|s| s.points.iter());
    let xa = Axis::fit(all().map(|p| p.0), panel.log_x);
    let ya = Axis::fit(
        panel.series.iter().flat_map(|s| {
            s.points.iter().enumerate().flat_map(move |(i, p)| {
                let e = s.errors.as_ref().map_or(0.0, |e| e[i]);
                [p.1 - e, p.1 + e]
            })
        }),
        panel.log_y,
    );
    let px = |v: f64| xa.map(v).map(|t| left + t * w);
    let py = |v: f64| ya.map(v).map(|t| top + (1.0 - t) * h);

    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"##,
        left + w / 2.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{left:.1}" y="{top:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#444"/>"##
    );
    for (t, label) in xa.ticks() {
        let x = left + t * w;
        let _ = writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="10">{label}</text>"##,
            top + h,
            top + h + 4.0,
            top + h + 15.0
        );
    }
    for (t, label) in ya.ticks() {
        let y = top + (1.0 - t) * h;
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{left:.1}" y2="{y:.1}" stroke="#444"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{label}</text>"##,
            left - 4.0,
            left - 6.0,
            y + 3.5
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"##,
        left + w / 2.0,
        top + h + 34.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11" transform="rotate(-90 {:.1} {:.1})">{}</text>"##,
        x0 + 14.0,
        top + h / 2.0,
        x0 + 14.0,
        top + h / 2.0,
        escape(&panel.y_label)
    );
    if let Some(x) = panel.marker_x.and_then(px) {
        let _ = writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{top:.1}" x2="{x:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="4 3"/>"##,
            top + h
        );
    }
    for (k, s) in panel.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mapped: Vec<Option<(f64, f64)>> = s.points.iter().map(|&(x, y)| Some((px(x)?, py(y)?))).collect();
        match s.style {
            Style::Line => {
                // Break the polyline wherever a point cannot be drawn.
                for run in mapped.split(|p| p.is_none()).filter(|r| r.len() > 1) {
                    let pts: Vec<String> = run.iter().flatten().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                    let _ = writeln!(
                        out,
                        r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"##,
                        pts.join(" ")
                    );
                }
            }
            Style::Markers => {
                for (x, y) in mapped.iter().flatten() {
                    let _ = writeln!(out, r##"<circle cx="{x:.1}" cy="{y:.1}" r="2.5" fill="{color}"/>"##);
                }
            }
        }
        if let Some(errors) = &s.errors {
            for (&(x, y), &e) in s.points.iter().zip(errors) {
                if let (Some(cx), Some(a), Some(b)) = (px(x), py(y - e), py(y + e)) {
                    let _ = writeln!(
                        out,
                        r##"<line x1="{cx:.1}" y1="{a:.1}" x2="{cx:.1}" y2="{b:.1}" stroke="{color}"/>"##
                    );
                }
            }
        }
        let ly = top + 12.0 + 14.0 * k as f64;
        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="10" height="3" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="10">{}</text>"##,
            left + 8.0,
            ly - 4.0,
            left + 22.0,
            ly,
            escape(&s.label)
        );
    }
}

pub fn render(panels: &[Panel]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL_H:.0}" viewBox="0 0 {width:.0} {PANEL_H:.0}" font-family="sans-serif">"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, i as f64 * PANEL_W);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_deterministic_self_contained_svg() {
        let mut p = Panel::new("a < b", "x", "y");
        p.log_x = true;
        p.marker_x = Some(10.0);
        p.series.push(Series::line("curve", vec![(1.0, 2.0), (10.0, 3.0), (0.0, 1.0), (100.0, f64::NAN)]));
        p.series.push(Series::markers("pts", vec![(5.0, 2.5)]).with_errors(vec![0.1]));
        let a = render(&[p.clone(), Panel::new("empty", "", "")]);
        assert_eq!(a, render(&[p, Panel::new("empty", "", "")]));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("a &lt; b"));
        assert!(!a.contains("href") && !a.contains("NaN"));
    }

    #[test]
    fn linear_ticks_are_round() {
        let a = Axis::fit([0.0, 0.93].into_iter(), false);
        let labels: Vec<String> = a.ticks().into_iter().map(|t| t.1).collect();
        assert_eq!(labels, ["0", "0.2", "0.4", "0.6", "0.8"]);
    }
}
