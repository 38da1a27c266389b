//! Archetype analysis by alternating simplex-constrained least squares.
//!
//! Each restart starts from `k` distinct random observations as archetypes and
//! alternates two steps until the relative RSS gain drops below `tol`:
//!
//! 1. every observation's mixture weights `α_i` are fitted on the simplex
//!    spanned by the current archetypes;
//! 2. given `α`, the unconstrained archetypes `Z̃ = argmin ‖X − αZ̃‖²` are
//!    computed from ridge-stabilized normal equations and each `z̃_j` is
//!    projected back into the data hull as a simplex combination `β_j` of the
//!    observations, `Z = βX`.
//!
//! A sweep whose RSS exceeds the previous one is discarded and the restart
//! stops at the previous iterate, so recorded RSS histories never increase.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{cholesky_solve, sq_dist, Matrix};
use crate::par;
use crate::patterns::RowPatterns;
use crate::simplex_ls::SimplexLs;

const RIDGE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AaOptions {
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AaOptions {
    fn default() -> Self {
        AaOptions { restarts: 20, seed: 0, tol: 1e-6, max_iter: 200 }
    }
}

#[derive(Debug, Clone)]
pub struct AaModel {
    /// n×k mixture weights, rows on the simplex.
    pub alpha: Matrix,
    /// k×n generator weights, rows on the simplex.
    pub beta: Matrix,
    /// k×m archetypes, `Z = βX`.
    pub archetypes: Matrix,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// RSS after each accepted sweep of the winning restart.
    pub rss_history: Vec<f64>,
    /// Index of the winning restart.
    pub restart: usize,
    /// Final RSS of every restart, in restart order.
    pub restart_rss: Vec<f64>,
    pub warnings: Vec<String>,
}

impl AaModel {
    pub fn k(&self) -> usize {
        self.archetypes.rows()
    }
}

/// `Σ_i ‖x_i − Σ_j α_ij z_j‖²`.
pub fn compute_rss(x: &Matrix, alpha: &Matrix, z: &Matrix) -> Result<f64> {
    if alpha.rows() != x.rows() || alpha.cols() != z.rows() || z.cols() != x.cols() {
        return Err(Error::Dimension(format!(
            "X is {}x{}, alpha {}x{}, Z {}x{}",
            x.rows(),
            x.cols(),
            alpha.rows(),
            alpha.cols(),
            z.rows(),
            z.cols()
        )));
    }
    let fit = alpha.matmul(z)?;
    Ok(x.iter_rows().zip(fit.iter_rows()).map(|(a, b)| sq_dist(a, b)).sum())
}

/// Fits every row of `x` on the simplex of `solver`'s vertices, solving once
/// per distinct row pattern.
pub(crate) fn solve_alpha(solver: &SimplexLs, x: &Matrix, patterns: &RowPatterns) -> Result<Matrix> {
    let sols = par::map_range(patterns.len(), |p| solver.solve(x.row(patterns.reps[p])));
    let mut alpha = Matrix::zeros(x.rows(), solver.k());
    let sols: Vec<_> = sols.into_iter().collect::<Result<_>>()?;
    for (i, &p) in patterns.of_row.iter().enumerate() {
        alpha.row_mut(i).copy_from_slice(sols[p].weights.as_slice());
    }
    Ok(alpha)
}

pub fn fit_aa(x: &Matrix, k: usize, opts: &AaOptions) -> Result<AaModel> {
    let n = x.rows();
    if k == 0 {
        return Err(Error::Dimension("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::Cardinality(format!("k = {k} exceeds the {n} observations")));
    }
    if opts.restarts == 0 {
        return Err(Error::Cardinality("at least one restart is required".into()));
    }
    if opts.max_iter == 0 {
        return Err(Error::Cardinality("max_iter must be at least 1".into()));
    }
    if !x.is_finite() {
        return Err(Error::NumericInput("data matrix"));
    }
    let patterns = RowPatterns::new(x);
    let mut warnings = Vec::new();
    if patterns.len() < k {
        warnings.push(format!("only {} distinct rows for k = {k}; archetypes will coincide", patterns.len()));
    }
    let hull = SimplexLs::new(x.select_rows(&patterns.reps))?;

    let runs = par::map_range(opts.restarts, |r| run_restart(x, k, opts, r, &patterns, &hull));
    let mut best: Option<Restart> = None;
    let mut restart_rss = Vec::with_capacity(runs.len());
    let mut winner = 0;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        restart_rss.push(run.rss);
        if best.as_ref().is_none_or(|b| run.rss < b.rss) {
            winner = r;
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");
    Ok(AaModel {
        alpha: best.alpha,
        beta: best.beta,
        archetypes: best.z,
        rss: best.rss,
        iterations: best.history.len(),
        converged: best.converged,
        rss_history: best.history,
        restart: winner,
        restart_rss,
        warnings,
    })
}

struct Restart {
    alpha: Matrix,
    beta: Matrix,
    z: Matrix,
    rss: f64,
    history: Vec<f64>,
    converged: bool,
}

/// Random stream for one restart: ChaCha8 keyed by `seed`, stream = restart index.
pub(crate) fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restart(
    x: &Matrix,
    k: usize,
    opts: &AaOptions,
    restart: usize,
    patterns: &RowPatterns,
    hull: &SimplexLs,
) -> Result<Restart> {
    let n = x.rows();
    let mut rng = restart_rng(opts.seed, restart);
    let start = rand::seq::index::sample(&mut rng, n, k).into_vec();
    let mut beta = Matrix::zeros(k, n);
    for (j, &i) in start.iter().enumerate() {
        beta[(j, i)] = 1.0;
    }
    let mut z = x.select_rows(&start);

    let mut history: Vec<f64> = Vec::new();
    let mut prev: Option<(Matrix, Matrix, Matrix)> = None;
    let mut converged = false;

    for _ in 0..opts.max_iter {
        let alpha = solve_alpha(&SimplexLs::new(z.clone())?, x, patterns)?;
        let rss = compute_rss(x, &alpha, &z)?;
        if let Some(&last) = history.last() {
            if rss > last {
                let (a, b, zz) = prev.take().expect("previous iterate kept");
                return Ok(Restart { alpha: a, beta: b, z: zz, rss: last, history, converged: true });
            }
            let gain = if last > 0.0 { (last - rss) / last } else { 0.0 };
            if gain < opts.tol {
                history.push(rss);
                return Ok(Restart { alpha, beta, z, rss, history, converged: true });
            }
        }
        history.push(rss);
        if rss == 0.0 {
            return Ok(Restart { alpha, beta, z, rss, history, converged: true });
        }

        let (new_beta, new_z) = match update_archetypes(x, &alpha, patterns, hull)? {
            Some(v) => v,
            None => {
                converged = false;
                prev = Some((alpha, beta, z));
                break;
            }
        };
        prev = Some((alpha, core::mem::replace(&mut beta, new_beta), core::mem::replace(&mut z, new_z)));
    }

    // iteration budget exhausted: the last accepted iterate is in `prev`
    let (alpha, beta, z) = prev.expect("at least one sweep");
    let rss = *history.last().expect("at least one sweep");
    Ok(Restart { alpha, beta, z, rss, history, converged })
}

/// β-step: unconstrained archetypes from normal equations, then each one
/// projected onto the hull of the observations.
fn update_archetypes(
    x: &Matrix,
    alpha: &Matrix,
    patterns: &RowPatterns,
    hull: &SimplexLs,
) -> Result<Option<(Matrix, Matrix)>> {
    let k = alpha.cols();
    let mut gram = alpha.tr_matmul(alpha)?;
    for j in 0..k {
        gram[(j, j)] += RIDGE;
    }
    let rhs = alpha.tr_matmul(x)?;
    let Some(z_free) = cholesky_solve(&gram, &rhs) else {
        return Ok(None);
    };
    if !z_free.is_finite() {
        return Ok(None);
    }
    let sols = par::map_range(k, |j| hull.solve(z_free.row(j)));
    let mut beta = Matrix::zeros(k, x.rows());
    for (j, s) in sols.into_iter().enumerate() {
        let s = s?;
        for (&rep, &w) in patterns.reps.iter().zip(s.weights.as_slice()) {
            beta[(j, rep)] = w;
        }
    }
    let z = beta.matmul(x)?;
    Ok(Some((beta, z)))
}
