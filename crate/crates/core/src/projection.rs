//! Circular simplex layout: every observation is drawn at the barycentric
//! combination, by its mixture weights, of `k` anchors evenly spaced on the
//! unit circle (anchor `j` at angle `2πj/k`, zero-based, starting on the
//! positive x-axis).

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::simplex_ls::check_simplex;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn dist(self, o: Point) -> f64 {
        libm::hypot(self.x - o.x, self.y - o.y)
    }
}

pub fn anchors(k: usize) -> Vec<Point> {
    (0..k)
        .map(|j| {
            if j == 0 {
                return Point { x: 1.0, y: 0.0 };
            }
            let t = 2.0 * core::f64::consts::PI * j as f64 / k as f64;
            Point { x: libm::cos(t), y: libm::sin(t) }
        })
        .collect()
}

/// Projects every α row (n×k) onto the anchor layout.
pub fn project_simplex(alpha: &Matrix) -> Result<Vec<Point>> {
    let k = alpha.cols();
    if k == 0 {
        return Err(Error::Dimension("mixture weights need at least one column".into()));
    }
    let anchors = anchors(k);
    alpha
        .iter_rows()
        .enumerate()
        .map(|(i, row)| {
            check_simplex(row, 1e-6, 1e-6)
                .map_err(|e| Error::Domain(alloc::format!("alpha row {i}: {e}")))?;
            let mut p = Point { x: 0.0, y: 0.0 };
            for (&w, a) in row.iter().zip(&anchors) {
                p.x += w * a.x;
                p.y += w * a.y;
            }
            Ok(p)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexLayout {
    pub anchors: Vec<Point>,
    pub points: Vec<Point>,
    pub color_labels: Vec<String>,
    pub anchor_labels: Vec<String>,
}

impl SimplexLayout {
    pub fn new(alpha: &Matrix, color_labels: Vec<String>, anchor_labels: Vec<String>) -> Result<Self> {
        if color_labels.len() != alpha.rows() {
            return Err(Error::Dimension(alloc::format!(
                "{} color labels for {} observations",
                color_labels.len(),
                alpha.rows()
            )));
        }
        if anchor_labels.len() != alpha.cols() {
            return Err(Error::Dimension(alloc::format!(
                "{} anchor labels for {} archetypes",
                anchor_labels.len(),
                alpha.cols()
            )));
        }
        Ok(SimplexLayout {
            anchors: anchors(alpha.cols()),
            points: project_simplex(alpha)?,
            color_labels,
            anchor_labels,
        })
    }

    pub fn k(&self) -> usize {
        self.anchors.len()
    }
}
