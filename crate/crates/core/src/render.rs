//! Static SVG maps of node fields on point coordinates, with optional edge
//! segments colored by an edge-level value.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::ArealGraph;

pub type Rgb = (u8, u8, u8);

pub const LOW_COLOR: Rgb = (33, 102, 172);
pub const HIGH_COLOR: Rgb = (178, 24, 43);
pub const VIEWPORT: f64 = 800.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub low: Rgb,
    pub high: Rgb,
    pub node_radius: f64,
    pub edge_width: f64,
    pub margin: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            low: LOW_COLOR,
            high: HIGH_COLOR,
            node_radius: 12.0,
            edge_width: 4.0,
            margin: 40.0,
        }
    }
}

/// Position of `v` in `[min, max]`, 0.5 for a degenerate range.
pub fn normalize(v: f64, min: f64, max: f64) -> f64 {
    if max > min {
        ((v - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

/// Linear interpolation between the anchors, channels rounded to nearest.
pub fn interpolate(t: f64, low: Rgb, high: Rgb) -> Rgb {
    let ch = |a: u8, b: u8| (a as f64 + t * (b as f64 - a as f64)).round() as u8;
    (ch(low.0, high.0), ch(low.1, high.1), ch(low.2, high.2))
}

fn range(values: &[f64]) -> Result<(f64, f64)> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("field values must be finite"));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

/// Color of every value over the range of `values`.
pub fn colors(values: &[f64], opts: &RenderOptions) -> Result<Vec<Rgb>> {
    let (min, max) = range(values)?;
    Ok(values
        .iter()
        .map(|&v| interpolate(normalize(v, min, max), opts.low, opts.high))
        .collect())
}

fn hex(c: Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", c.0, c.1, c.2)
}

struct Projection {
    min: (f64, f64),
    scale: f64,
    margin: f64,
}

impl Projection {
    fn new(coords: &[(f64, f64)], margin: f64) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in coords {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span = (x1 - x0).max(y1 - y0);
        let scale = if span > 0.0 { (VIEWPORT - 2.0 * margin) / span } else { 0.0 };
        Self {
            min: (x0, y0),
            scale,
            margin,
        }
    }

    /// SVG y grows downward, so north is flipped to the top.
    fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (
            self.margin + (x - self.min.0) * self.scale,
            VIEWPORT - self.margin - (y - self.min.1) * self.scale,
        )
    }
}

/// SVG map of a node field, optionally with edges colored by `edge_values`.
pub fn render_field(
    field: &[f64],
    coords: &[(f64, f64)],
    graph: Option<(&ArealGraph, Option<&[f64]>)>,
    opts: &RenderOptions,
) -> Result<String> {
    if field.is_empty() {
        return Err(Error::invalid("empty field"));
    }
    if coords.len() < field.len() {
        return Err(Error::invalid(format!(
            "missing coordinate for node {} ({} coordinates for {} nodes)",
            coords.len(),
            coords.len(),
            field.len()
        )));
    }
    let coords = &coords[..field.len()];
    if let Some(i) = coords.iter().position(|&(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(Error::invalid(format!("missing coordinate for node {i}")));
    }
    let node_colors = colors(field, opts)?;
    let proj = Projection::new(coords, opts.margin);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{v}" height="{v}" viewBox="0 0 {v} {v}">"#,
        v = VIEWPORT
    );
    let _ = writeln!(svg, r#"<rect width="{v}" height="{v}" fill="white"/>"#, v = VIEWPORT);
    if let Some((g, edge_values)) = graph {
        if g.n() != field.len() {
            return Err(Error::Dimension(format!(
                "graph has {} nodes but field has {}",
                g.n(),
                field.len()
            )));
        }
        let edge_colors = match edge_values {
            Some(ev) if ev.len() != g.p() => {
                return Err(Error::Dimension(format!(
                    "{} edge values for {} edges",
                    ev.len(),
                    g.p()
                )))
            }
            Some(ev) => Some(colors(ev, opts)?),
            None => None,
        };
        let _ = writeln!(svg, r#"<g id="edges" stroke-linecap="round">"#);
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let (x1, y1) = proj.apply(coords[u]);
            let (x2, y2) = proj.apply(coords[v]);
            let (stroke, width) = match &edge_colors {
                Some(c) => (hex(c[e]), opts.edge_width),
                None => ("#bbbbbb".to_string(), 1.0),
            };
            let _ = writeln!(
                svg,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("<g id=\"nodes\">\n");
    for (i, (&c, &pt)) in node_colors.iter().zip(coords).enumerate() {
        let (cx, cy) = proj.apply(pt);
        let _ = writeln!(
            svg,
            r#"<circle id="n{i}" cx="{cx:.2}" cy="{cy:.2}" r="{}" fill="{}"/>"#,
            opts.node_radius,
            hex(c)
        );
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}
