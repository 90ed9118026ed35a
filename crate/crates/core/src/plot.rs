//! Standalone SVG scatter plots of an embedding, one colour per class.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Embedding, LabelVector};

const LEGEND_WIDTH: f64 = 140.0;
const LEGEND_ROW: f64 = 18.0;
const MARGIN: f64 = 0.05;

/// Tableau-10 palette.
pub const DEFAULT_PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub point_radius: f64,
    /// Colours assigned to classes in lexicographic order, cycling.
    pub palette: Vec<String>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            point_radius: 3.0,
            palette: DEFAULT_PALETTE.iter().map(|c| c.to_string()).collect(),
        }
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn render_svg_string(e: &Embedding, labels: &LabelVector, spec: &PlotSpec) -> Result<String> {
    if e.n() == 0 {
        return Err(Error::DegenerateInput("nothing to plot".into()));
    }
    if labels.len() != e.n() {
        return Err(Error::SizeMismatch(format!(
            "{} labels for {} points",
            labels.len(),
            e.n()
        )));
    }
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::InvalidConfig("plot width and height must be positive".into()));
    }
    if spec.palette.is_empty() {
        return Err(Error::InvalidConfig("palette is empty".into()));
    }

    let colours: BTreeMap<&str, &str> = labels
        .classes()
        .into_iter()
        .enumerate()
        .map(|(i, class)| (class, spec.palette[i % spec.palette.len()].as_str()))
        .collect();

    let (width, height) = (f64::from(spec.width), f64::from(spec.height));
    let plot_width = (width - LEGEND_WIDTH).max(width * 0.5);

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in e.points() {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    let mut span = [hi[0] - lo[0], hi[1] - lo[1]];
    let centre = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    if span[0] <= 0.0 && span[1] <= 0.0 {
        span = [1.0, 1.0];
    }
    // One scale for both axes keeps map distances undistorted.
    let usable = [plot_width * (1.0 - 2.0 * MARGIN), height * (1.0 - 2.0 * MARGIN)];
    let scale = [usable[0] / span[0], usable[1] / span[1]]
        .into_iter()
        .filter(|s| s.is_finite())
        .fold(f64::INFINITY, f64::min);
    let to_px = |p: [f64; 2]| {
        [
            0.5 * plot_width + (p[0] - centre[0]) * scale,
            0.5 * height - (p[1] - centre[1]) * scale,
        ]
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = spec.width,
        h = spec.height
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        spec.width, spec.height
    );
    let _ = writeln!(svg, r#"<g id="points" stroke="none">"#);
    for (p, label) in e.points().iter().zip(labels.iter()) {
        let [x, y] = to_px(*p);
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="{}"/>"#,
            spec.point_radius, colours[label]
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g id="legend" font-family="sans-serif" font-size="12">"#);
    for (row, (class, colour)) in colours.iter().enumerate() {
        let y = 20.0 + row as f64 * LEGEND_ROW;
        let _ = writeln!(
            svg,
            r#"<g><circle cx="{:.3}" cy="{:.3}" r="5" fill="{colour}"/><text x="{:.3}" y="{:.3}">{}</text></g>"#,
            plot_width + 12.0,
            y,
            plot_width + 22.0,
            y + 4.0,
            escape(class)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

pub fn render_svg(e: &Embedding, labels: &LabelVector, spec: &PlotSpec, path: &Path) -> Result<()> {
    let svg = render_svg_string(e, labels, spec)?;
    fs::write(path, svg).map_err(|err| Error::io(path, err))
}
