//! Binarization of continuous archetypes and Hamming complementarity of
//! profile sets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::encoding::ColumnGroup;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ada,
    Aa,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ada => "ADA",
            Method::Aa => "AA",
        }
    }
}

/// Row-major 0/1 matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    /// Accepts only entries exactly 0 or 1.
    pub fn from_f64(m: &Matrix) -> Result<Self> {
        let mut data = Vec::with_capacity(m.rows() * m.cols());
        for &v in m.as_slice() {
            data.push(match v {
                0.0 => 0,
                1.0 => 1,
                x => return Err(Error::Domain(format!("profile entry {x} is not binary"))),
            });
        }
        Ok(BinaryMatrix { rows: m.rows(), cols: m.cols(), data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_f64(&self) -> Matrix {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(|&b| f64::from(b)).collect())
            .expect("shape preserved")
    }
}

/// `1` where an entry is strictly above `threshold`, else `0`.
pub fn binarize(z: &Matrix, threshold: f64) -> Result<BinaryMatrix> {
    if !z.is_finite() || !threshold.is_finite() {
        return Err(Error::NumericInput("binarization input"));
    }
    let data = z.as_slice().iter().map(|&v| u8::from(v > threshold)).collect();
    Ok(BinaryMatrix { rows: z.rows(), cols: z.cols(), data })
}

/// Square matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    k: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn new(k: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != k * k {
            return Err(Error::Dimension(format!("{} entries for a {k}x{k} matrix", data.len())));
        }
        Ok(DistanceMatrix { k, data })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.k..(i + 1) * self.k]
    }
}

/// Number of differing coordinates for every ordered pair of profiles.
pub fn hamming_matrix(profiles: &BinaryMatrix) -> DistanceMatrix {
    let k = profiles.rows();
    let mut data = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let d = profiles.row(i).iter().zip(profiles.row(j)).filter(|(a, b)| a != b).count();
            data.push(d as u32);
        }
    }
    DistanceMatrix { k, data }
}

/// Histogram over all k² ordered entries (the zero diagonal included) and the
/// sum of all entries.
pub fn distance_summary(h: &DistanceMatrix) -> Result<(BTreeMap<u32, usize>, u64)> {
    for i in 0..h.k {
        if h.get(i, i) != 0 {
            return Err(Error::Domain(format!("diagonal entry {i} is {}", h.get(i, i))));
        }
        for j in 0..i {
            if h.get(i, j) != h.get(j, i) {
                return Err(Error::Domain(format!("distance matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut histogram = BTreeMap::new();
    let mut total = 0u64;
    for &d in &h.data {
        *histogram.entry(d).or_insert(0) += 1;
        total += u64::from(d);
    }
    Ok((histogram, total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    One,
    None,
    Multiple,
}

impl Coverage {
    pub fn as_str(self) -> &'static str {
        match self {
            Coverage::One => "ONE",
            Coverage::None => "NONE",
            Coverage::Multiple => "MULTIPLE",
        }
    }
}

/// Per profile and variable: how many categories of the group are switched on.
pub fn coverage_check(profiles: &BinaryMatrix, groups: &[ColumnGroup]) -> Result<Vec<Vec<Coverage>>> {
    let m: usize = groups.iter().map(|g| g.start + g.len).max().unwrap_or(0);
    if m > profiles.cols() {
        return Err(Error::Dimension(format!("groups span {m} columns, profiles have {}", profiles.cols())));
    }
    Ok((0..profiles.rows())
        .map(|i| {
            let row = profiles.row(i);
            groups
                .iter()
                .map(|g| match row[g.range()].iter().filter(|&&b| b == 1).count() {
                    0 => Coverage::None,
                    1 => Coverage::One,
                    _ => Coverage::Multiple,
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub method: Method,
    pub profiles: BinaryMatrix,
    pub hamming: DistanceMatrix,
    pub histogram: BTreeMap<u32, usize>,
    pub total: u64,
    pub coverage: Vec<Vec<Coverage>>,
}

impl EvaluationReport {
    pub fn new(method: Method, profiles: BinaryMatrix, groups: &[ColumnGroup]) -> Result<Self> {
        let hamming = hamming_matrix(&profiles);
        let (histogram, total) = distance_summary(&hamming)?;
        let coverage = coverage_check(&profiles, groups)?;
        Ok(EvaluationReport { method, profiles, hamming, histogram, total, coverage })
    }

    /// ADA profiles always cover every variable exactly once.
    pub fn all_covered(&self) -> bool {
        self.coverage.iter().flatten().all(|&c| c == Coverage::One)
    }
}
