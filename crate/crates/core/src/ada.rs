//! Archetypoid analysis: archetypes restricted to actual observations.
//!
//! BUILD turns a fitted archetype model into three candidate index sets
//! (nearest row to each archetype, row with the largest `α_ij`, row with the
//! largest `β_jl`). SWAP then repeatedly evaluates every exchange of one
//! archetypoid for one non-archetypoid row and applies the single best
//! strictly improving exchange, until none is left.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::aa::{compute_rss, fit_aa, AaModel, AaOptions};
use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::par;
use crate::patterns::RowPatterns;
use crate::simplex_ls::{Scratch, SimplexLs};

/// A swap is accepted only if it lowers RSS by more than `IMPROVE_TOL · (1 + rss)`.
pub const IMPROVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum InitKind {
    Nearest,
    MaxAlpha,
    MaxBeta,
    User,
}

impl InitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InitKind::Nearest => "NEAREST",
            InitKind::MaxAlpha => "MAX_ALPHA",
            InitKind::MaxBeta => "MAX_BETA",
            InitKind::User => "USER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildCandidates {
    pub nearest: Vec<usize>,
    pub max_alpha: Vec<usize>,
    pub max_beta: Vec<usize>,
}

impl BuildCandidates {
    pub fn iter(&self) -> impl Iterator<Item = (InitKind, &[usize])> {
        [
            (InitKind::Nearest, self.nearest.as_slice()),
            (InitKind::MaxAlpha, self.max_alpha.as_slice()),
            (InitKind::MaxBeta, self.max_beta.as_slice()),
        ]
        .into_iter()
    }
}

/// Outcome of SWAP from one starting set.
#[derive(Debug, Clone, PartialEq)]
pub struct StartReport {
    pub kind: InitKind,
    pub initial: Vec<usize>,
    pub initial_rss: f64,
    pub final_rss: f64,
    pub swap_steps: usize,
}

#[derive(Debug, Clone)]
pub struct AdaModel {
    /// Zero-based row indices of the archetypoids, in archetype order.
    pub indices: Vec<usize>,
    /// n×k mixture weights.
    pub alpha: Matrix,
    pub rss: f64,
    pub init_kind: InitKind,
    pub swap_steps: usize,
    /// One entry per SWAP start that was run.
    pub starts: Vec<StartReport>,
    pub warnings: Vec<String>,
}

impl AdaModel {
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    /// The archetypoids as a k×m matrix (rows of `x`).
    pub fn archetypoids(&self, x: &Matrix) -> Matrix {
        x.select_rows(&self.indices)
    }
}

#[derive(Debug, Clone)]
pub enum AdaInit {
    /// Fit archetype analysis with these options and SWAP from all three BUILD sets.
    Auto(AaOptions),
    /// SWAP from the given zero-based indices.
    User(Vec<usize>),
}

pub fn build_candidates(aa: &AaModel, x: &Matrix) -> Result<BuildCandidates> {
    let n = x.rows();
    let k = aa.k();
    if aa.alpha.rows() != n || aa.beta.cols() != n || aa.archetypes.cols() != x.cols() || aa.alpha.cols() != k {
        return Err(Error::Dimension("archetype model does not match the data matrix".into()));
    }
    if k > n {
        return Err(Error::Cardinality(format!("k = {k} exceeds the {n} observations")));
    }
    let nearest = pick_distinct(k, n, |j| {
        let z = aa.archetypes.row(j);
        (0..n).map(|i| sq_dist(x.row(i), z)).collect()
    }, Ordering::Less);
    let max_alpha = pick_distinct(k, n, |j| (0..n).map(|i| aa.alpha[(i, j)]).collect(), Ordering::Greater);
    let max_beta = pick_distinct(k, n, |j| aa.beta.row(j).to_vec(), Ordering::Greater);
    Ok(BuildCandidates { nearest, max_alpha, max_beta })
}

/// For each archetype in order, the best-scoring row not already taken;
/// `prefer` says whether lower (`Less`) or higher (`Greater`) scores win.
/// Equal scores go to the lower row index.
fn pick_distinct(k: usize, n: usize, scores: impl Fn(usize) -> Vec<f64>, prefer: Ordering) -> Vec<usize> {
    let mut taken = vec![false; n];
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let s = scores(j);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let c = s[a].partial_cmp(&s[b]).unwrap_or(Ordering::Equal);
            let c = if prefer == Ordering::Greater { c.reverse() } else { c };
            c.then(a.cmp(&b))
        });
        let pick = order.into_iter().find(|&i| !taken[i]).expect("k <= n");
        taken[pick] = true;
        out.push(pick);
    }
    out
}

fn validate_indices(n: usize, indices: &[usize]) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::Dimension("at least one archetypoid is required".into()));
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::Domain(format!("row index {i} out of range for {n} rows")));
    }
    let distinct: BTreeSet<usize> = indices.iter().copied().collect();
    if distinct.len() != indices.len() {
        return Err(Error::Cardinality("archetypoid indices must be distinct".into()));
    }
    Ok(())
}

/// Mixture weights and RSS for a given archetypoid set, solving every row
/// independently.
pub fn evaluate_indices(x: &Matrix, indices: &[usize]) -> Result<(Matrix, f64)> {
    validate_indices(x.rows(), indices)?;
    let z = x.select_rows(indices);
    let solver = SimplexLs::new(z.clone())?;
    let sols = par::map_range(x.rows(), |i| solver.solve(x.row(i)));
    let mut alpha = Matrix::zeros(x.rows(), indices.len());
    for (i, s) in sols.into_iter().enumerate() {
        alpha.row_mut(i).copy_from_slice(s?.weights.as_slice());
    }
    let rss = compute_rss(x, &alpha, &z)?;
    Ok((alpha, rss))
}

pub fn fit_ada(x: &Matrix, k: usize, init: &AdaInit) -> Result<AdaModel> {
    let n = x.rows();
    if k == 0 {
        return Err(Error::Dimension("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::Cardinality(format!("k = {k} exceeds the {n} observations")));
    }
    match init {
        AdaInit::Auto(opts) => {
            let aa = fit_aa(x, k, opts)?;
            fit_ada_from_aa(x, &aa)
        }
        AdaInit::User(start) => {
            if start.len() != k {
                return Err(Error::Cardinality(format!("{} initial indices for k = {k}", start.len())));
            }
            let search = SwapSearch::new(x)?;
            let (report, indices) = search.run(start.clone(), InitKind::User)?;
            finish(x, &search, indices, vec![report], 0)
        }
    }
}

/// BUILD from a fitted archetype model, SWAP from each candidate set, keep the
/// lowest final RSS (earlier start wins ties).
pub fn fit_ada_from_aa(x: &Matrix, aa: &AaModel) -> Result<AdaModel> {
    let candidates = build_candidates(aa, x)?;
    let search = SwapSearch::new(x)?;
    let mut reports: Vec<StartReport> = Vec::with_capacity(3);
    let mut best: Option<(usize, Vec<usize>)> = None;
    for (kind, start) in candidates.iter() {
        let (report, indices) = search.run(start.to_vec(), kind)?;
        let better = best.as_ref().is_none_or(|(b, _)| report.final_rss < reports[*b].final_rss);
        reports.push(report);
        if better {
            best = Some((reports.len() - 1, indices));
        }
    }
    let (winner, indices) = best.expect("three starts");
    finish(x, &search, indices, reports, winner)
}

fn finish(
    x: &Matrix,
    search: &SwapSearch<'_>,
    indices: Vec<usize>,
    starts: Vec<StartReport>,
    winner: usize,
) -> Result<AdaModel> {
    let (alpha, rss) = evaluate_indices(x, &indices)?;
    let mut warnings = Vec::new();
    if search.patterns.len() < indices.len() {
        warnings.push(format!(
            "only {} distinct rows for k = {}; some archetypoids share a pattern",
            search.patterns.len(),
            indices.len()
        ));
    }
    Ok(AdaModel {
        indices,
        alpha,
        rss,
        init_kind: starts[winner].kind,
        swap_steps: starts[winner].swap_steps,
        starts,
        warnings,
    })
}

/// SWAP state shared by all starts on one data matrix. RSS is accumulated per
/// distinct row pattern, weighted by its multiplicity; a candidate is abandoned
/// as soon as its partial sum can no longer beat the acceptance bound.
pub(crate) struct SwapSearch<'a> {
    x: &'a Matrix,
    patterns: RowPatterns,
    /// Pattern ids by decreasing multiplicity, so large terms come first.
    order: Vec<usize>,
}

impl<'a> SwapSearch<'a> {
    pub(crate) fn new(x: &'a Matrix) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NumericInput("data matrix"));
        }
        let patterns = RowPatterns::new(x);
        let mut order: Vec<usize> = (0..patterns.len()).collect();
        order.sort_by(|&a, &b| patterns.counts[b].cmp(&patterns.counts[a]).then(a.cmp(&b)));
        Ok(SwapSearch { x, patterns, order })
    }

    /// RSS of `indices`, or `None` once the running sum reaches `bound`.
    pub(crate) fn rss(&self, indices: &[usize], bound: f64) -> Result<Option<f64>> {
        let solver = SimplexLs::new(self.x.select_rows(indices))?;
        let own: Vec<usize> = indices.iter().map(|&i| self.patterns.of_row[i]).collect();
        let mut scratch = Scratch::default();
        let mut acc = 0.0;
        for &p in &self.order {
            if own.contains(&p) {
                continue;
            }
            let (objective, _) = solver.solve_with(self.x.row(self.patterns.reps[p]), &mut scratch)?;
            acc += self.patterns.counts[p] as f64 * objective;
            if acc >= bound {
                return Ok(None);
            }
        }
        Ok((acc < bound).then_some(acc))
    }

    pub(crate) fn run(&self, start: Vec<usize>, kind: InitKind) -> Result<(StartReport, Vec<usize>)> {
        validate_indices(self.x.rows(), &start)?;
        let k = start.len();
        let mut idx = start.clone();
        let initial_rss = self.rss(&idx, f64::INFINITY)?.expect("unbounded");
        let mut cur = initial_rss;
        let mut steps = 0;
        loop {
            let bound = cur - IMPROVE_TOL * (1.0 + cur);
            let taken: BTreeSet<usize> = idx.iter().copied().collect();
            // lowest free row of every pattern; other duplicates give identical RSS
            let mut rows: Vec<usize> = self
                .patterns
                .members
                .iter()
                .filter_map(|m| m.iter().copied().find(|r| !taken.contains(r)))
                .collect();
            rows.sort_unstable();
            if rows.is_empty() {
                break;
            }
            let total = k * rows.len();
            let results = par::map_range(total, |c| {
                let (pos, r) = (c / rows.len(), rows[c % rows.len()]);
                let mut trial = idx.clone();
                trial[pos] = r;
                self.rss(&trial, bound)
            });
            let mut best: Option<(usize, f64)> = None;
            for (c, res) in results.into_iter().enumerate() {
                if let Some(v) = res? {
                    if best.is_none_or(|(_, b)| v < b) {
                        best = Some((c, v));
                    }
                }
            }
            let Some((c, v)) = best else { break };
            idx[c / rows.len()] = rows[c % rows.len()];
            cur = v;
            steps += 1;
        }
        Ok((
            StartReport { kind, initial: start, initial_rss, final_rss: cur, swap_steps: steps },
            idx,
        ))
    }
}
