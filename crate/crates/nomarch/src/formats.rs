//! On-disk artifacts: CSV tables, the model file and the run manifest.
//!
//! Every real number written to a CSV goes through [`fmt_num`] (6 significant
//! digits); JSON files keep full precision so models reload losslessly.

use std::collections::BTreeMap;
use std::io::Write;

use nomarch_core::{
    AdaModel, Coverage, DistanceMatrix, DummyMatrix, NominalTable, Outcome, Point, StartReport, VariableSchema,
};
use serde::{Deserialize, Serialize};

/// `%g`-style formatting with 6 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..6).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Dummy matrix as CSV with `var=category` headers and 0/1 cells.
pub fn write_encoded<W: Write>(x: &DummyMatrix, w: W) -> csv::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(x.column_names())?;
    for row in x.values().iter_rows() {
        out.write_record(row.iter().map(|&v| if v == 1.0 { "1" } else { "0" }))?;
    }
    out.flush()?;
    Ok(())
}

/// Decoded profiles, one row per archetype: case label then one cell per variable.
pub fn write_profiles<W: Write>(
    cases: &[String],
    decoded: &[Vec<Outcome>],
    schemas: &[VariableSchema],
    w: W,
) -> csv::Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["case".to_string()];
    header.extend(schemas.iter().map(|s| s.name().to_string()));
    out.write_record(&header)?;
    for (case, outcomes) in cases.iter().zip(decoded) {
        let mut rec = vec![case.clone()];
        rec.extend(outcomes.iter().zip(schemas).map(|(o, s)| o.describe(s)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_hamming<W: Write>(cases: &[String], h: &DistanceMatrix, w: W) -> csv::Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["case".to_string()];
    header.extend(cases.iter().cloned());
    out.write_record(&header)?;
    for (i, case) in cases.iter().enumerate() {
        let mut rec = vec![case.clone()];
        rec.extend(h.row(i).iter().map(u32::to_string));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// One method's line in `summary.csv`.
#[derive(Debug, Clone, Copy)]
pub struct SummaryRow<'a> {
    pub method: &'a str,
    pub histogram: &'a BTreeMap<u32, usize>,
    pub total: u64,
    pub coverage: &'a [Vec<Coverage>],
}

/// `ONE` when every profile has exactly one category per variable, else the
/// counts of the failing cells.
pub fn coverage_flag(coverage: &[Vec<Coverage>]) -> String {
    let count = |c: Coverage| coverage.iter().flatten().filter(|&&x| x == c).count();
    let (none, multiple) = (count(Coverage::None), count(Coverage::Multiple));
    if none == 0 && multiple == 0 {
        "ONE".to_string()
    } else {
        format!("NONE={none};MULTIPLE={multiple}")
    }
}

/// Distance histogram as one row per method: observed distances as columns,
/// then `Total` and the coverage flag.
pub fn write_summary<W: Write>(rows: &[SummaryRow], w: W) -> csv::Result<()> {
    let distances: std::collections::BTreeSet<u32> = rows.iter().flat_map(|r| r.histogram.keys().copied()).collect();
    let mut out = csv_writer(w);
    let mut header = vec!["Distance".to_string()];
    header.extend(distances.iter().map(u32::to_string));
    header.push("Total".to_string());
    header.push("Coverage".to_string());
    out.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.method.to_string()];
        rec.extend(distances.iter().map(|d| r.histogram.get(d).copied().unwrap_or(0).to_string()));
        rec.push(r.total.to_string());
        rec.push(coverage_flag(r.coverage));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_coverage<W: Write>(
    cases: &[String],
    coverage: &[Vec<Coverage>],
    schemas: &[VariableSchema],
    w: W,
) -> csv::Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["case".to_string()];
    header.extend(schemas.iter().map(|s| s.name().to_string()));
    out.write_record(&header)?;
    for (case, flags) in cases.iter().zip(coverage) {
        let mut rec = vec![case.clone()];
        rec.extend(flags.iter().map(|c| c.as_str().to_string()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Projected observations as `row_id,x,y,label`.
pub fn write_points<W: Write>(row_ids: &[usize], points: &[Point], labels: &[String], w: W) -> csv::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["row_id", "x", "y", "label"])?;
    for ((id, p), label) in row_ids.iter().zip(points).zip(labels) {
        out.write_record([id.to_string(), fmt_num(p.x), fmt_num(p.y), label.clone()])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub kind: String,
    /// 1-based row ids of the starting archetypoids.
    pub initial: Vec<usize>,
    pub initial_rss: f64,
    pub final_rss: f64,
    pub swap_steps: usize,
}

impl StartRecord {
    pub fn new(s: &StartReport, row_ids: &[usize]) -> Self {
        StartRecord {
            kind: s.kind.as_str().to_string(),
            initial: s.initial.iter().map(|&i| row_ids[i]).collect(),
            initial_rss: s.initial_rss,
            final_rss: s.final_rss,
            swap_steps: s.swap_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    /// Mean weight of every archetype over all observations.
    pub mean: Vec<f64>,
    /// Number of observations whose largest weight is on each archetype.
    pub dominant: Vec<usize>,
}

impl AlphaSummary {
    pub fn new(alpha: &nomarch_core::Matrix) -> Self {
        let k = alpha.cols();
        let n = alpha.rows().max(1) as f64;
        let mut mean = vec![0.0; k];
        let mut dominant = vec![0; k];
        for row in alpha.iter_rows() {
            let mut arg = 0;
            for (j, &w) in row.iter().enumerate() {
                mean[j] += w / n;
                if w > row[arg] {
                    arg = j;
                }
            }
            dominant[arg] += 1;
        }
        AlphaSummary { mean, dominant }
    }
}

/// Everything a later `report` or `plot` needs, plus fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub tool_version: String,
    pub method: String,
    pub input_format: String,
    pub data_hash: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub threshold: f64,
    pub rss: f64,
    /// ADA: 1-based row ids of the archetypoids, in archetype order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archetypoids: Option<Vec<usize>>,
    /// AA: continuous archetypes, k rows of m values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archetypes: Option<Vec<Vec<f64>>>,
    pub alpha: Vec<Vec<f64>>,
    pub alpha_summary: AlphaSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<StartRecord>,
    /// RSS of the archetype fit (the ADA initializer, or the AA model itself).
    pub aa_rss: f64,
    pub aa_iterations: usize,
    pub aa_converged: bool,
    pub aa_restart_rss: Vec<f64>,
    pub warnings: Vec<String>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl ModelFile {
    pub fn ada_indices(&self, x: &DummyMatrix) -> Option<Vec<usize>> {
        let ids = self.archetypoids.as_ref()?;
        ids.iter().map(|id| x.row_ids().iter().position(|r| r == id)).collect()
    }
}

pub fn ada_starts(model: &AdaModel, table: &NominalTable) -> Vec<StartRecord> {
    model.starts.iter().map(|s| StartRecord::new(s, table.row_ids())).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub data_hash: String,
    pub config: crate::config::RunConfig,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1442.9163544), "1442.92");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(-0.123456789), "-0.123457");
        assert_eq!(fmt_num(1234567.0), "1.23457e6");
        assert_eq!(fmt_num(999999.7), "1e6");
        assert_eq!(fmt_num(1.5e-7), "1.5e-7");
        assert_eq!(fmt_num(6.123233995736766e-17), "6.12323e-17");
        assert_eq!(fmt_num(100.0), "100");
    }

    #[test]
    fn summary_columns_follow_observed_distances() {
        let a: BTreeMap<u32, usize> = [(0, 2), (4, 2)].into();
        let b: BTreeMap<u32, usize> = [(0, 2), (6, 2)].into();
        let mut buf = Vec::new();
        let ok = vec![vec![Coverage::One, Coverage::One]];
        let bad = vec![vec![Coverage::None, Coverage::One], vec![Coverage::Multiple, Coverage::None]];
        let rows = [
            SummaryRow { method: "ADA", histogram: &a, total: 8, coverage: &ok },
            SummaryRow { method: "AA", histogram: &b, total: 12, coverage: &bad },
        ];
        write_summary(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "Distance,0,4,6,Total,Coverage\nADA,2,2,0,8,ONE\nAA,2,0,2,12,NONE=2;MULTIPLE=1\n"
        );
    }
}
