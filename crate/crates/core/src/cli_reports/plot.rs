use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 620.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 350.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// Hausdorff distance against `s`, both axes logarithmic (`theorem_a.csv`).
    TheoremA,
    /// One eigenfunction trace per `s` (`trace.csv`).
    Pinch,
    /// Isotypic dimension per level and `s` as bars (`multiplicity.csv`).
    Multiplicity,
    /// Eigenvalue against index (`spectrum.csv`).
    Spectrum,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem-a" => Ok(Self::TheoremA),
            "pinch" => Ok(Self::Pinch),
            "multiplicity" => Ok(Self::Multiplicity),
            "spectrum" => Ok(Self::Spectrum),
            _ => invalid(format!("unknown plot kind {s:?} (expected theorem-a, pinch, multiplicity or spectrum)")),
        }
    }
}

/// Strokes of a glyph in a 4 x 6 box, y pointing down.
fn glyph(c: char) -> &'static [&'static [(f64, f64)]] {
    const A: &[(f64, f64)] = &[(0.0, 0.0), (4.0, 0.0)];
    const B: &[(f64, f64)] = &[(4.0, 0.0), (4.0, 3.0)];
    const C: &[(f64, f64)] = &[(4.0, 3.0), (4.0, 6.0)];
    const D: &[(f64, f64)] = &[(0.0, 6.0), (4.0, 6.0)];
    const E: &[(f64, f64)] = &[(0.0, 3.0), (0.0, 6.0)];
    const F: &[(f64, f64)] = &[(0.0, 0.0), (0.0, 3.0)];
    const G: &[(f64, f64)] = &[(0.0, 3.0), (4.0, 3.0)];
    match c {
        '0' => &[A, B, C, D, E, F],
        '1' => &[B, C],
        '2' => &[A, B, G, E, D],
        '3' => &[A, B, G, C, D],
        '4' => &[F, G, B, C],
        '5' => &[A, F, G, C, D],
        '6' => &[A, F, G, E, C, D],
        '7' => &[A, B, C],
        '8' => &[A, B, C, D, E, F, G],
        '9' => &[A, B, F, G, C, D],
        '.' => &[&[(1.5, 5.2), (2.5, 5.2), (2.5, 6.0), (1.5, 6.0), (1.5, 5.2)]],
        '-' => &[&[(0.5, 3.0), (3.5, 3.0)]],
        '+' => &[&[(0.5, 3.0), (3.5, 3.0)], &[(2.0, 1.5), (2.0, 4.5)]],
        'e' => &[&[(0.0, 4.5), (4.0, 4.5), (4.0, 3.0), (0.0, 3.0), (0.0, 6.0), (4.0, 6.0)]],
        _ => &[],
    }
}

/// Path data for `text` with its top-left corner at `(x, y)`.
fn text_path(text: &str, x: f64, y: f64, scale: f64) -> String {
    let mut d = String::new();
    for (i, c) in text.chars().enumerate() {
        let ox = x + i as f64 * 6.0 * scale;
        for stroke in glyph(c) {
            for (k, &(gx, gy)) in stroke.iter().enumerate() {
                let _ = write!(d, "{}{:.2} {:.2} ", if k == 0 { 'M' } else { 'L' }, ox + gx * scale, y + gy * scale);
            }
        }
    }
    d.trim_end().to_string()
}

fn text_width(text: &str, scale: f64) -> f64 {
    (text.chars().count() as f64 * 6.0 - 2.0) * scale
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = if log { (0.1, 1.0) } else { (0.0, 1.0) };
        }
        if log {
            lo = 10f64.powf(lo.log10().floor());
            hi = 10f64.powf(hi.log10().ceil());
            if hi <= lo {
                hi = lo * 10.0;
            }
        } else if hi - lo < 1e-300 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log }
    }

    fn fraction(&self, v: f64) -> f64 {
        if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
            let step = ((b - a) as f64 / 6.0).ceil().max(1.0) as i32;
            (a..=b).step_by(step as usize).map(|e| (10f64.powi(e), format!("1e{e}"))).collect()
        } else {
            (0..=4)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                    let label = if (self.hi - self.lo).abs() >= 10.0 { format!("{v:.0}") } else if (self.hi - self.lo).abs() >= 0.1 { format!("{v:.2}") } else { format!("{v:.1e}") };
                    (v, label)
                })
                .collect()
        }
    }
}

struct Canvas {
    body: String,
    x: Axis,
    y: Axis,
}

impl Canvas {
    fn new(x: Axis, y: Axis) -> Self {
        Self { body: String::new(), x, y }
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + self.x.fraction(v) * (RIGHT - LEFT)
    }

    fn py(&self, v: f64) -> f64 {
        BOTTOM - self.y.fraction(v) * (BOTTOM - TOP)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str) {
        let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        let _ = writeln!(self.body, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, d.join(" "));
    }

    fn markers(&mut self, pts: &[(f64, f64)], color: &str) {
        for &(x, y) in pts {
            let _ = writeln!(self.body, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, self.px(x), self.py(y));
        }
    }

    fn rect(&mut self, x0: f64, x1: f64, y: f64, color: &str) {
        let (a, b) = (self.px(x0), self.px(x1));
        let (top, base) = (self.py(y), self.py(self.y.lo.max(0.0)));
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
            a,
            top,
            (b - a).max(0.5),
            (base - top).max(0.0)
        );
    }

    fn finish(self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(s, r#"<path d="M{LEFT} {TOP} L{LEFT} {BOTTOM} L{RIGHT} {BOTTOM}" fill="none" stroke="black" stroke-width="1"/>"#);
        let mut labels = String::new();
        for (v, label) in self.x.ticks() {
            let x = self.px(v);
            let _ = writeln!(s, r#"<path d="M{x:.2} {BOTTOM} L{x:.2} {:.2}" stroke="black" stroke-width="1"/>"#, BOTTOM + 5.0);
            let _ = write!(labels, "{} ", text_path(&label, x - text_width(&label, 1.5) / 2.0, BOTTOM + 10.0, 1.5));
        }
        for (v, label) in self.y.ticks() {
            let y = self.py(v);
            let _ = writeln!(s, r#"<path d="M{:.2} {y:.2} L{LEFT} {y:.2}" stroke="black" stroke-width="1"/>"#, LEFT - 5.0);
            let _ = write!(labels, "{} ", text_path(&label, LEFT - 10.0 - text_width(&label, 1.5), y - 4.5, 1.5));
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="black" stroke-width="1"/>"#, labels.trim_end());
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

/// Rows of the named columns, in file order.
fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<String>>> {
    let mut rd = csv::Reader::from_path(path)?;
    let headers = rd.headers()?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| Error::InvalidInput(format!("{} has no column {n:?}", path.display())))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push(idx.iter().map(|&i| rec.get(i).unwrap_or("").to_string()).collect());
    }
    Ok(rows)
}

fn num(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

fn grouped(rows: &[Vec<String>]) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let (Some(x), Some(y)) = (num(&r[1]), num(&r[2])) else { continue };
        match groups.iter_mut().find(|g| g.0 == r[0]) {
            Some(g) => g.1.push((x, y)),
            None => groups.push((r[0].clone(), vec![(x, y)])),
        }
    }
    groups
}

/// Deterministic SVG for a report table.
pub fn plot(report: &Path, kind: PlotKind) -> Result<String> {
    match kind {
        PlotKind::TheoremA => {
            let rows = read_columns(report, &["s", "hausdorff"])?;
            let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((num(&r[0])?, num(&r[1])?))).filter(|p| p.0 > 0.0 && p.1 > 0.0).collect();
            if pts.is_empty() {
                return invalid("report has no positive hausdorff values");
            }
            let mut c = Canvas::new(Axis::new(pts.iter().map(|p| p.0), true), Axis::new(pts.iter().map(|p| p.1), true));
            c.polyline(&pts, PALETTE[0]);
            c.markers(&pts, PALETTE[0]);
            Ok(c.finish())
        }
        PlotKind::Pinch => {
            let groups = grouped(&read_columns(report, &["s", "t", "value"])?);
            if groups.is_empty() {
                return invalid("trace has no samples");
            }
            let all = || groups.iter().flat_map(|g| g.1.iter());
            let mut c = Canvas::new(Axis::new(all().map(|p| p.0), false), Axis::new(all().map(|p| p.1), false));
            for (i, (_, pts)) in groups.iter().enumerate() {
                c.polyline(pts, PALETTE[i % PALETTE.len()]);
            }
            Ok(c.finish())
        }
        PlotKind::Multiplicity => {
            let rows = read_columns(report, &["s", "level", "isotypic_dimension"])?;
            let groups = grouped(&rows);
            if groups.is_empty() {
                return invalid("multiplicity report has no rows");
            }
            let levels = groups.iter().map(|g| g.1.len()).max().unwrap_or(1) as f64;
            let n = groups.len() as f64;
            let heights = groups.iter().flat_map(|g| g.1.iter().map(|p| p.1)).chain(std::iter::once(0.0));
            let mut c = Canvas::new(Axis { lo: 0.0, hi: n, log: false }, Axis::new(heights, false));
            for (i, (_, bars)) in groups.iter().enumerate() {
                let w = 0.8 / levels;
                for (j, &(_, h)) in bars.iter().enumerate() {
                    let x0 = i as f64 + 0.1 + j as f64 * w;
                    c.rect(x0, x0 + w * 0.9, h, PALETTE[j % PALETTE.len()]);
                }
            }
            Ok(c.finish())
        }
        PlotKind::Spectrum => {
            let rows = read_columns(report, &["index", "eigenvalue"])?;
            let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((num(&r[0])?, num(&r[1])?))).collect();
            if pts.is_empty() {
                return invalid("spectrum report has no rows");
            }
            let mut c = Canvas::new(Axis::new(pts.iter().map(|p| p.0), false), Axis::new(pts.iter().map(|p| p.1), false));
            c.markers(&pts, PALETTE[0]);
            Ok(c.finish())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn theorem_a_plot_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "r.csv", "s,radius,hausdorff\n0.5,1,4e-2\n0.2,1,2e-2\n0.05,1,5e-3\n0,,\n");
        let a = plot(&p, PlotKind::TheoremA).unwrap();
        let b = plot(&p, PlotKind::TheoremA).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && !a.contains("<text") && !a.contains("font"));
        assert_eq!(a.matches("<circle").count(), 3);
    }

    #[test]
    fn pinch_plot_draws_one_line_per_s() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.csv", "s,t,value\n0.5,-1,0\n0.5,1,1\n0.2,-1,0.1\n0.2,1,0.9\n");
        assert_eq!(plot(&p, PlotKind::Pinch).unwrap().matches("<polyline").count(), 2);
    }

    #[test]
    fn missing_columns_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "x.csv", "a,b\n1,2\n");
        let err = plot(&p, PlotKind::Multiplicity).unwrap_err();
        assert!(err.to_string().contains("\"s\""));
        assert!("bars".parse::<PlotKind>().is_err());
    }

    #[test]
    fn glyphs_cover_number_formats() {
        for c in "0123456789.-+e".chars() {
            assert!(!glyph(c).is_empty());
        }
        assert!(text_path("1e-3", 0.0, 0.0, 1.0).starts_with('M'));
    }
}
