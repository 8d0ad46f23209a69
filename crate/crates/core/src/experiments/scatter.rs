//! Scatter export: a tidy point CSV and a self-contained SVG plot.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::trials::TrialTable;
use crate::geometry::Point2D;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Maps frame millimeters onto SVG pixels. `y` grows upward in the frame and
/// downward in SVG, so the vertical axis is flipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterLayout {
    pub width_px: f64,
    pub height_px: f64,
    pub margin_px: f64,
    pub domain_min_mm: f64,
    pub domain_max_mm: f64,
}

impl Default for ScatterLayout {
    fn default() -> Self {
        Self {
            width_px: 600.0,
            height_px: 600.0,
            margin_px: 60.0,
            domain_min_mm: 0.0,
            domain_max_mm: 1000.0,
        }
    }
}

impl ScatterLayout {
    pub fn to_px(&self, p: Point2D) -> (f64, f64) {
        let span = self.domain_max_mm - self.domain_min_mm;
        let plot_w = self.width_px - 2.0 * self.margin_px;
        let plot_h = self.height_px - 2.0 * self.margin_px;
        let px = self.margin_px + (p.x - self.domain_min_mm) / span * plot_w;
        let py = self.height_px - self.margin_px - (p.y - self.domain_min_mm) / span * plot_h;
        (px, py)
    }
}

/// `position_index,trial_index,x_mm,y_mm,is_actual`; positions and trials are
/// 1-based and actual rows leave `trial_index` empty. Failed trials are omitted.
pub fn scatter_csv(table: &TrialTable) -> String {
    let mut out = String::from("position_index,trial_index,x_mm,y_mm,is_actual\n");
    for (i, p) in table.positions.iter().enumerate() {
        for (t, e) in p.trials.iter().enumerate() {
            if let Some(e) = e {
                let _ = writeln!(out, "{},{},{},{},false", i + 1, t + 1, e.x, e.y);
            }
        }
    }
    for (i, p) in table.positions.iter().enumerate() {
        let _ = writeln!(out, "{},,{},{},true", i + 1, p.actual.x, p.actual.y);
    }
    out
}

pub fn scatter_svg(table: &TrialTable, layout: &ScatterLayout) -> String {
    let l = layout;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = l.width_px,
        h = l.height_px
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        l.width_px / 2.0,
        l.margin_px / 2.0,
        xml_escape(&table.experiment_id)
    );

    // axes with a tick every 100 mm
    let (x0, y0) = l.to_px(Point2D::new(l.domain_min_mm, l.domain_min_mm));
    let (x1, y1) = l.to_px(Point2D::new(l.domain_max_mm, l.domain_max_mm));
    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="ticks" font-family="sans-serif" font-size="10">"#);
    let step = (l.domain_max_mm - l.domain_min_mm) / 10.0;
    for k in 0..=10 {
        let v = l.domain_min_mm + step * k as f64;
        let (tx, _) = l.to_px(Point2D::new(v, l.domain_min_mm));
        let (_, ty) = l.to_px(Point2D::new(l.domain_min_mm, v));
        let _ = writeln!(s, r#"<line x1="{tx}" y1="{y0}" x2="{tx}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{tx}" y="{}" text-anchor="middle">{v}</text>"#, y0 + 18.0);
        let _ = writeln!(s, r#"<line x1="{}" y1="{ty}" x2="{x0}" y2="{ty}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v}</text>"#, x0 - 8.0, ty + 3.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">x (mm)</text>"#,
        (x0 + x1) / 2.0,
        l.height_px - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {})">y (mm)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (i, p) in table.positions.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="position" data-position="{}" fill="{color}">"#, i + 1);
        for e in p.estimates() {
            let (cx, cy) = l.to_px(e);
            let _ = writeln!(s, r#"<circle class="trial" cx="{cx}" cy="{cy}" r="3"/>"#);
        }
        let (ax, ay) = l.to_px(p.actual);
        let _ = writeln!(
            s,
            r#"<rect class="actual" x="{}" y="{}" width="10" height="10" data-cx="{ax}" data-cy="{ay}" stroke="black"/>"#,
            ax - 5.0,
            ay - 5.0
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `<stem>_scatter.csv` and `<stem>_scatter.svg` into `dir`.
pub fn export_scatter(table: &TrialTable, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    table.validate()?;
    let csv_path = dir.join(format!("{stem}_scatter.csv"));
    let svg_path = dir.join(format!("{stem}_scatter.svg"));
    std::fs::write(&csv_path, scatter_csv(table)).map_err(|e| Error::io(&csv_path, e))?;
    write_svg(table, &svg_path)?;
    Ok(vec![csv_path, svg_path])
}

pub fn write_svg(table: &TrialTable, path: &Path) -> Result<()> {
    table.validate()?;
    std::fs::write(path, scatter_svg(table, &ScatterLayout::default())).map_err(|e| Error::io(path, e))
}
