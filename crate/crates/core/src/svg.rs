//! Minimal SVG line plots and heatmaps drawn from a table's columns.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::output::Table;

#[derive(Debug, Clone, PartialEq)]
pub enum Plot {
    Lines { x: String, ys: Vec<String>, log_x: bool, log_y: bool },
    /// Long-format table with one row per grid point.
    Heatmap { x: String, y: String, z: String },
}

impl Plot {
    pub fn lines(x: &str, ys: &[&str]) -> Self {
        Plot::Lines { x: x.into(), ys: ys.iter().map(|s| (*s).into()).collect(), log_x: false, log_y: false }
    }

    pub fn log_x(mut self) -> Self {
        if let Plot::Lines { log_x, .. } = &mut self {
            *log_x = true;
        }
        self
    }

    pub fn heatmap(x: &str, y: &str, z: &str) -> Self {
        Plot::Heatmap { x: x.into(), y: y.into(), z: z.into() }
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Err(Error::Numerical("nothing finite to plot".into()));
        }
        if hi - lo < 1e-300 {
            let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
            lo -= pad;
            hi += pad;
        }
        Ok(Self { lo, hi, log })
    }

    fn unit(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|i| {
                let u = i as f64 / 4.0;
                let v = self.lo + u * (self.hi - self.lo);
                let shown = if self.log { 10f64.powf(v) } else { v };
                (u, format!("{shown:.3e}"))
            })
            .collect()
    }
}

fn frame(out: &mut String, xa: &Axis, ya: &Axis, xlabel: &str, ylabel: &str) {
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for (u, label) in xa.ticks() {
        let x = LEFT + u * pw;
        let y = TOP + ph;
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{label}</text>"#, y + 17.0);
    }
    for (u, label) in ya.ticks() {
        let y = TOP + (1.0 - u) * ph;
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{label}</text>"#, LEFT - 7.0, y + 3.0);
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(ylabel)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn column(table: &Table, name: &str) -> Result<Vec<f64>> {
    table.values(name).ok_or_else(|| Error::Internal(format!("plot column `{name}` missing from `{}`", table.name)))
}

pub fn render(table: &Table, plot: &Plot) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{LEFT}" y="18" font-size="13">{}</text>"#, escape(&table.name));
    match plot {
        Plot::Lines { x, ys, log_x, log_y } => lines(&mut out, table, x, ys, *log_x, *log_y)?,
        Plot::Heatmap { x, y, z } => heatmap(&mut out, table, x, y, z)?,
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn lines(out: &mut String, table: &Table, x: &str, ys: &[String], log_x: bool, log_y: bool) -> Result<()> {
    let xs = column(table, x)?;
    let series: Vec<Vec<f64>> = ys.iter().map(|y| column(table, y)).collect::<Result<_>>()?;
    let xa = Axis::fit(xs.iter().copied(), log_x)?;
    let ya = Axis::fit(series.iter().flatten().copied(), log_y)?;
    frame(out, &xa, &ya, x, &ys.join(", "));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (xv, yv) in xs.iter().zip(s) {
            match (xa.unit(*xv), ya.unit(*yv)) {
                (Some(u), Some(v)) => {
                    let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, LEFT + u * pw, TOP + (1.0 - v) * ph);
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{color}" text-anchor="end">{}</text>"#,
            W - RIGHT - 5.0,
            TOP + 14.0 * (k + 1) as f64,
            escape(&ys[k])
        );
    }
    Ok(())
}

fn distinct(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    u.sort_by(f64::total_cmp);
    u.dedup();
    u
}

/// Blue to yellow ramp.
fn color(u: f64) -> String {
    let u = u.clamp(0.0, 1.0);
    let r = (68.0 + u * (253.0 - 68.0)) as u8;
    let g = (1.0 + u * (231.0 - 1.0)) as u8;
    let b = (84.0 + u * (37.0 - 84.0)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn heatmap(out: &mut String, table: &Table, x: &str, y: &str, z: &str) -> Result<()> {
    let (xs, ys, zs) = (column(table, x)?, column(table, y)?, column(table, z)?);
    let (ux, uy) = (distinct(&xs), distinct(&ys));
    if ux.len() < 2 || uy.len() < 2 {
        return Err(Error::Numerical("heatmap needs at least a 2x2 grid".into()));
    }
    let xa = Axis::fit(ux.iter().copied(), false)?;
    let ya = Axis::fit(uy.iter().copied(), false)?;
    let za = Axis::fit(zs.iter().copied(), false)?;
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let cw = pw / ux.len() as f64;
    let ch = ph / uy.len() as f64;
    for ((xv, yv), zv) in xs.iter().zip(&ys).zip(&zs) {
        let (Ok(i), Ok(j)) = (ux.binary_search_by(|p| p.total_cmp(xv)), uy.binary_search_by(|p| p.total_cmp(yv))) else {
            continue;
        };
        let Some(c) = za.unit(*zv) else { continue };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            LEFT + i as f64 * cw,
            TOP + ph - (j + 1) as f64 * ch,
            cw + 0.05,
            ch + 0.05,
            color(c)
        );
    }
    // map tick positions onto cell centers
    let xa = Axis { lo: ux[0] - 0.5 * (xa.hi - xa.lo) / (ux.len() - 1) as f64, hi: xa.hi + 0.5 * (xa.hi - xa.lo) / (ux.len() - 1) as f64, log: false };
    let ya = Axis { lo: uy[0] - 0.5 * (ya.hi - ya.lo) / (uy.len() - 1) as f64, hi: ya.hi + 0.5 * (ya.hi - ya.lo) / (uy.len() - 1) as f64, log: false };
    frame(out, &xa, &ya, x, y);
    let _ = writeln!(out, r#"<text x="{:.2}" y="18" font-size="11" text-anchor="end">{z}: {:.3e} .. {:.3e}</text>"#, W - RIGHT, za.lo, za.hi);
    Ok(())
}
