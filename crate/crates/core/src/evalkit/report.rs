use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::{FidelityReport, RocCurve, ScatterPoint, TimingStats};
use crate::surrogate::CvReport;

/// Opens a CSV writer whose first line is a `#` comment describing the
/// columns.
fn csv_with_comment(path: &Path, comment: &str) -> io::Result<csv::Writer<BufWriter<File>>> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# {comment}")?;
    Ok(csv::Writer::from_writer(out))
}

fn finish(mut w: csv::Writer<BufWriter<File>>) -> io::Result<()> {
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_fidelity_csv(report: &FidelityReport, path: impl AsRef<Path>) -> Result<(), csv::Error> {
    write_cv_csv(&[&report.regression, &report.classification], path)
}

/// Per-fold, pooled and mean-of-folds metric rows for each report.
pub fn write_cv_csv(reports: &[&CvReport], path: impl AsRef<Path>) -> Result<(), csv::Error> {
    let mut w = csv_with_comment(
        path.as_ref(),
        "task, fold (index, 'pooled' over all out-of-fold predictions, or 'mean' of folds), n records, metric (R2 for regression, ROC AUC for classification; empty when undefined)",
    )?;
    w.write_record(["task", "fold", "n", "metric"])?;
    for cv in reports {
        for f in &cv.folds {
            w.write_record([cv.task.to_string(), f.fold.to_string(), f.n.to_string(), opt(f.metric)])?;
        }
        let n = cv.predictions.len().to_string();
        w.write_record([cv.task.to_string(), "pooled".into(), n.clone(), opt(cv.pooled)])?;
        w.write_record([cv.task.to_string(), "mean".into(), n, opt(cv.mean_fold_metric())])?;
    }
    Ok(finish(w)?)
}

pub fn write_scatter_csv(points: &[ScatterPoint], path: impl AsRef<Path>) -> Result<(), csv::Error> {
    let mut w = csv_with_comment(
        path.as_ref(),
        "smiles, oracle synthesis cost (11 = no route), out-of-fold regression prediction, out-of-fold route probability",
    )?;
    w.write_record(["smiles", "oracle", "predicted", "route_probability"])?;
    for p in points {
        w.write_record([p.smiles.clone(), p.oracle.to_string(), p.predicted.to_string(), p.route_probability.to_string()])?;
    }
    Ok(finish(w)?)
}

pub fn write_roc_csv(roc: &RocCurve, path: impl AsRef<Path>) -> Result<(), csv::Error> {
    let mut w = csv_with_comment(path.as_ref(), &format!("false positive rate, true positive rate; AUC = {}", roc.auc))?;
    w.write_record(["fpr", "tpr"])?;
    for (x, y) in &roc.points {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    Ok(finish(w)?)
}

pub fn write_timing_csv(rows: &[(&str, TimingStats)], path: impl AsRef<Path>) -> Result<(), csv::Error> {
    let mut w = csv_with_comment(
        path.as_ref(),
        "subject, timed items, mean/median/p95 seconds per item, speedup over the reference (empty for the reference)",
    )?;
    w.write_record(["subject", "count", "mean_s", "median_s", "p95_s", "speedup"])?;
    for (name, t) in rows {
        w.write_record([
            name.to_string(),
            t.count.to_string(),
            t.mean.to_string(),
            t.median.to_string(),
            t.p95.to_string(),
            opt(t.speedup),
        ])?;
    }
    Ok(finish(w)?)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    Line,
    /// Horizontal-then-vertical steps, for best-so-far curves.
    Step,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a (f64, f64)>) -> Frame {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open_svg(frame: &Frame, title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let (w, h, m) = (WIDTH, HEIGHT, MARGIN);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(s, r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * m, h - 2.0 * m);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 15.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(ylabel)
    );
    for (v, anchor, x, y) in [
        (frame.x0, "start", m, h - m + 16.0),
        (frame.x1, "end", w - m, h - m + 16.0),
        (frame.y0, "end", m - 4.0, h - m),
        (frame.y1, "end", m - 4.0, m + 10.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{}</text>"#, tick(v));
    }
    s
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Scatter plot, optionally with the y = x diagonal.
pub fn svg_scatter(points: &[(f64, f64)], title: &str, xlabel: &str, ylabel: &str, diagonal: bool) -> String {
    let frame = Frame::fit(points.iter());
    let mut s = open_svg(&frame, title, xlabel, ylabel);
    if diagonal {
        let lo = frame.x0.max(frame.y0);
        let hi = frame.x1.min(frame.y1);
        if hi > lo {
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
                frame.px(lo),
                frame.py(lo),
                frame.px(hi),
                frame.py(hi)
            );
        }
    }
    for &(x, y) in points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}" fill-opacity="0.4"/>"#,
            frame.px(x),
            frame.py(y),
            COLORS[0]
        );
    }
    s.push_str("</svg>\n");
    s
}

/// One or more named polylines with a legend.
pub fn svg_lines(series: &[(&str, Vec<(f64, f64)>)], title: &str, xlabel: &str, ylabel: &str, style: LineStyle) -> String {
    let frame = Frame::fit(series.iter().flat_map(|(_, p)| p.iter()));
    let mut s = open_svg(&frame, title, xlabel, ylabel);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut path = String::new();
        let mut prev: Option<(f64, f64)> = None;
        for &(x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let (px, py) = (frame.px(x), frame.py(y));
            match prev {
                None => {
                    let _ = write!(path, "M{px:.2},{py:.2}");
                }
                Some((_, qy)) if style == LineStyle::Step => {
                    let _ = write!(path, " L{px:.2},{qy:.2} L{px:.2},{py:.2}");
                }
                Some(_) => {
                    let _ = write!(path, " L{px:.2},{py:.2}");
                }
            }
            prev = Some((px, py));
        }
        let _ = writeln!(s, r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let ly = MARGIN + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            WIDTH - MARGIN - 130.0,
            WIDTH - MARGIN - 125.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_enough() {
        let s = svg_scatter(&[(1.0, 1.0), (2.0, 3.0), (f64::NAN, 1.0)], "a < b", "x", "y", true);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<circle").count(), 2);
        assert!(s.contains("a &lt; b"));
        let l = svg_lines(&[("one", vec![(0.0, 0.0), (1.0, -1.0)]), ("two", vec![(0.0, 1.0)])], "t", "x", "y", LineStyle::Step);
        assert_eq!(l.matches("<path").count(), 2);
        assert!(svg_lines(&[], "t", "x", "y", LineStyle::Line).contains("</svg>"));
    }

    #[test]
    fn roc_csv_has_comment_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let roc = super::super::roc_auc(&[0.9, 0.8, 0.3], &[true, false, true]).unwrap();
        let path = dir.path().join("roc.csv");
        write_roc_csv(&roc, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# "));
        assert_eq!(lines.next(), Some("fpr,tpr"));
        assert_eq!(lines.count(), roc.points.len());
    }
}
