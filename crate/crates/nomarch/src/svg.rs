//! SVG rendering of a [`SimplexLayout`].

use std::fmt::Write;

use nomarch_core::{Point, SimplexLayout};
use thiserror::Error;

use crate::formats::fmt_num;

/// Radius of the anchor circle in SVG units.
pub const CANVAS_RADIUS: f64 = 200.0;
pub const GLYPH_RADIUS: f64 = 2.0;
pub const GLYPH_OPACITY: f64 = 0.6;

const ANCHOR_RADIUS: f64 = 4.0;
const LABEL_OFFSET: f64 = 16.0;
const FONT_SIZE: f64 = 10.0;
const LEGEND_X: f64 = CANVAS_RADIUS + 40.0;

const PALETTE: [&str; 8] = ["black", "red", "blue", "green", "orange", "purple", "brown", "gray"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SvgError {
    #[error("no color assigned to label `{0}`")]
    MissingColor(String),

    #[error("{0} categories exceed the default palette of {n} colors", n = PALETTE.len())]
    PaletteExhausted(usize),
}

/// Label to fill color, in legend order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColorMap(Vec<(String, String)>);

impl ColorMap {
    pub fn new(entries: Vec<(String, String)>) -> Self {
        ColorMap(entries)
    }

    /// First label black, second red, then further palette colors.
    pub fn default_for<S: AsRef<str>>(labels: &[S]) -> Result<Self, SvgError> {
        if labels.len() > PALETTE.len() {
            return Err(SvgError::PaletteExhausted(labels.len()));
        }
        Ok(ColorMap(
            labels.iter().zip(PALETTE).map(|(l, c)| (l.as_ref().to_string(), c.to_string())).collect(),
        ))
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.0.iter().find(|(l, _)| l == label).map(|(_, c)| c.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.0
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
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

/// Layout coordinates to SVG user units (y axis points down in SVG).
pub fn to_canvas(p: Point) -> (f64, f64) {
    (CANVAS_RADIUS * p.x, -CANVAS_RADIUS * p.y)
}

struct Bounds {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl Bounds {
    fn new() -> Self {
        Bounds { min_x: f64::INFINITY, min_y: f64::INFINITY, max_x: f64::NEG_INFINITY, max_y: f64::NEG_INFINITY }
    }

    fn add(&mut self, x: f64, y: f64, r: f64) {
        self.min_x = self.min_x.min(x - r);
        self.min_y = self.min_y.min(y - r);
        self.max_x = self.max_x.max(x + r);
        self.max_y = self.max_y.max(y + r);
    }

    fn add_text(&mut self, x: f64, y: f64, text: &str) {
        // rough advance of 0.6 em per character, centered
        let half = 0.3 * FONT_SIZE * text.chars().count() as f64;
        self.add(x - half, y, FONT_SIZE);
        self.add(x + half, y, FONT_SIZE);
    }
}

pub fn render_svg(layout: &SimplexLayout, colors: &ColorMap) -> Result<String, SvgError> {
    for label in &layout.color_labels {
        if colors.get(label).is_none() {
            return Err(SvgError::MissingColor(label.clone()));
        }
    }

    let mut bounds = Bounds::new();
    let mut body = String::new();

    // hull of the anchors
    if layout.k() >= 2 {
        let pts: Vec<String> = layout
            .anchors
            .iter()
            .map(|&a| {
                let (x, y) = to_canvas(a);
                format!("{},{}", fmt_num(x), fmt_num(y))
            })
            .collect();
        let _ = writeln!(
            body,
            r##"<polygon points="{}" fill="none" stroke="#bbbbbb" stroke-width="1"/>"##,
            pts.join(" ")
        );
    }

    body.push_str("<g class=\"observations\">\n");
    for (p, label) in layout.points.iter().zip(&layout.color_labels) {
        let (x, y) = to_canvas(*p);
        bounds.add(x, y, GLYPH_RADIUS);
        let _ = writeln!(
            body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{}" fill-opacity="{}"/>"#,
            fmt_num(x),
            fmt_num(y),
            fmt_num(GLYPH_RADIUS),
            escape(colors.get(label).expect("checked above")),
            fmt_num(GLYPH_OPACITY)
        );
    }
    body.push_str("</g>\n<g class=\"anchors\">\n");

    for (a, label) in layout.anchors.iter().zip(&layout.anchor_labels) {
        let (x, y) = to_canvas(*a);
        bounds.add(x, y, ANCHOR_RADIUS);
        let (tx, ty) = to_canvas(Point {
            x: a.x * (1.0 + LABEL_OFFSET / CANVAS_RADIUS),
            y: a.y * (1.0 + LABEL_OFFSET / CANVAS_RADIUS),
        });
        let label = escape(label);
        bounds.add_text(tx, ty, &label);
        let _ = writeln!(
            body,
            r#"<circle class="anchor" cx="{}" cy="{}" r="{}" fill="white" stroke="black" stroke-width="1"/>"#,
            fmt_num(x),
            fmt_num(y),
            fmt_num(ANCHOR_RADIUS)
        );
        let _ = writeln!(
            body,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="middle" dominant-baseline="middle">{label}</text>"#,
            fmt_num(tx),
            fmt_num(ty),
            fmt_num(FONT_SIZE)
        );
    }
    body.push_str("</g>\n<g class=\"legend\">\n");

    for (i, (label, color)) in colors.entries().iter().enumerate() {
        let y = -CANVAS_RADIUS + 16.0 * i as f64;
        let text = escape(label);
        bounds.add(LEGEND_X, y, 4.0);
        bounds.add_text(LEGEND_X + 10.0 + 0.3 * FONT_SIZE * text.chars().count() as f64, y, &text);
        let _ = writeln!(
            body,
            r#"<circle cx="{}" cy="{}" r="4" fill="{}"/>"#,
            fmt_num(LEGEND_X),
            fmt_num(y),
            escape(color)
        );
        let _ = writeln!(
            body,
            r#"<text x="{}" y="{}" font-size="{}" dominant-baseline="middle">{text}</text>"#,
            fmt_num(LEGEND_X + 10.0),
            fmt_num(y),
            fmt_num(FONT_SIZE)
        );
    }
    body.push_str("</g>\n");

    let w = bounds.max_x - bounds.min_x;
    let h = bounds.max_y - bounds.min_y;
    let (mx, my) = (0.05 * w, 0.05 * h);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}">"#,
        fmt_num(bounds.min_x - mx),
        fmt_num(bounds.min_y - my),
        fmt_num(w + 2.0 * mx),
        fmt_num(h + 2.0 * my)
    );
    svg.push_str(&body);
    svg.push_str("</svg>\n");
    Ok(svg)
}
