//! Least squares over the probability simplex:
//! `min ‖Σ_j w_j v_j − b‖²` subject to `w ≥ 0`, `Σ w = 1`.
//!
//! The equality constraint is folded into the design as an extra row of value
//! [`PENALTY`] (and the same value appended to `b`); the resulting
//! nonnegative least-squares problem is solved with the Lawson–Hanson active
//! set method and the solution is renormalized onto the simplex.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{dot, sq_dist, Matrix};

/// Weight of the appended sum-to-one row.
pub const PENALTY: f64 = 200.0;

/// Dual feasibility tolerance of the active-set loop.
pub const DUAL_TOL: f64 = 1e-10;

// A newly entering column whose Householder pivot falls below this fraction
// of its norm is treated as linearly dependent on the passive set.
const DEPENDENCE_TOL: f64 = 1e-10;

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    /// Validates nonnegativity (to 1e-10) and unit sum (to 1e-8).
    pub fn new(w: Vec<f64>) -> Result<Self> {
        check_simplex(&w, 1e-10, 1e-8)?;
        Ok(SimplexWeights(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn check_simplex(w: &[f64], neg_tol: f64, sum_tol: f64) -> Result<()> {
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericInput("simplex weights"));
    }
    if let Some(v) = w.iter().find(|&&v| v < -neg_tol) {
        return Err(Error::Domain(alloc::format!("negative simplex weight {v}")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > sum_tol {
        return Err(Error::Domain(alloc::format!("simplex weights sum to {s}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub weights: SimplexWeights,
    /// `‖Σ w_j v_j − b‖²` at the returned weights.
    pub objective: f64,
    /// The active-set iteration cap was hit; `weights` is the last feasible iterate.
    pub capped: bool,
}

/// Solver bound to a fixed set of vertices `v_1..v_k` (the rows of `vertices`).
#[derive(Debug, Clone)]
pub struct SimplexLs {
    vertices: Matrix,
    aug_norms: Vec<f64>,
}

impl SimplexLs {
    pub fn new(vertices: Matrix) -> Result<Self> {
        if vertices.rows() == 0 {
            return Err(Error::Dimension("simplex least squares needs at least one vertex".into()));
        }
        if !vertices.is_finite() {
            return Err(Error::NumericInput("simplex vertices"));
        }
        let aug_norms = vertices
            .iter_rows()
            .map(|v| libm::sqrt(dot(v, v) + PENALTY * PENALTY))
            .collect();
        Ok(SimplexLs { vertices, aug_norms })
    }

    pub fn k(&self) -> usize {
        self.vertices.rows()
    }

    pub fn dim(&self) -> usize {
        self.vertices.cols()
    }

    pub fn vertices(&self) -> &Matrix {
        &self.vertices
    }

    pub fn solve(&self, b: &[f64]) -> Result<SimplexSolution> {
        let mut scratch = Scratch::default();
        let (objective, capped) = self.solve_with(b, &mut scratch)?;
        Ok(SimplexSolution { weights: SimplexWeights(core::mem::take(&mut scratch.w)), objective, capped })
    }

    /// Allocation-free variant of [`solve`](Self::solve): the weights are left
    /// in `scratch` and `(objective, capped)` is returned.
    pub(crate) fn solve_with(&self, b: &[f64], scratch: &mut Scratch) -> Result<(f64, bool)> {
        if b.len() != self.dim() {
            return Err(Error::Dimension(alloc::format!(
                "target has {} entries, vertices have {}",
                b.len(),
                self.dim()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericInput("simplex target"));
        }
        let k = self.k();
        scratch.reset(k, self.dim());
        if k == 1 {
            scratch.w[0] = 1.0;
            return Ok((sq_dist(self.vertices.row(0), b), false));
        }
        let capped = self.nnls(b, scratch);
        let sum: f64 = scratch.x.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            for (w, &x) in scratch.w.iter_mut().zip(&scratch.x) {
                *w = x / sum;
            }
        } else {
            // Only reachable when b is so far from every vertex that the penalty
            // row never wins; the nearest vertex is then optimal to first order.
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, v) in self.vertices.iter_rows().enumerate() {
                let d = sq_dist(v, b);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            scratch.w[best] = 1.0;
        }
        let objective = self.objective_into(&scratch.w, b, &mut scratch.residual);
        Ok((objective, capped))
    }

    /// `‖Σ w_j v_j − b‖²`.
    pub fn objective(&self, w: &[f64], b: &[f64]) -> f64 {
        let mut fit = vec![0.0; self.dim()];
        self.objective_into(w, b, &mut fit)
    }

    fn objective_into(&self, w: &[f64], b: &[f64], fit: &mut [f64]) -> f64 {
        fit.iter_mut().for_each(|f| *f = 0.0);
        for (&wj, v) in w.iter().zip(self.vertices.iter_rows()) {
            if wj != 0.0 {
                for (f, &vi) in fit.iter_mut().zip(v) {
                    *f += wj * vi;
                }
            }
        }
        sq_dist(fit, b)
    }

    /// Lawson–Hanson NNLS on the augmented system `[Vᵀ; M 1ᵀ] x ≈ [b; M]`,
    /// leaving the solution in `s.x`. Returns whether the iteration cap was hit.
    fn nnls(&self, b: &[f64], s: &mut Scratch) -> bool {
        let k = self.k();
        let cap = 3 * k;
        let mut outer = 0;
        let mut capped = false;
        let Scratch { x, passive, in_passive, rejected, residual, ws, .. } = s;

        loop {
            // residual of the augmented system at x
            residual.copy_from_slice(b);
            let mut sum = 0.0;
            for &j in passive.iter() {
                let xj = x[j];
                sum += xj;
                for (r, &v) in residual.iter_mut().zip(self.vertices.row(j)) {
                    *r -= xj * v;
                }
            }
            let pen_residual = PENALTY * (1.0 - sum);

            let mut enter = None;
            let mut best = DUAL_TOL;
            for j in 0..k {
                if in_passive[j] || rejected[j] {
                    continue;
                }
                let w = dot(self.vertices.row(j), residual) + PENALTY * pen_residual;
                if w > best {
                    best = w;
                    enter = Some(j);
                }
            }
            let Some(j) = enter else { break };
            if outer == cap {
                capped = true;
                break;
            }
            outer += 1;

            passive.push(j);
            match self.lsq(passive, b, ws) {
                Ok(()) if ws.z[ws.z.len() - 1] > 0.0 => {}
                _ => {
                    passive.pop();
                    rejected[j] = true;
                    continue;
                }
            }
            in_passive[j] = true;
            rejected.iter_mut().for_each(|r| *r = false);

            loop {
                let z = &ws.z;
                if z.iter().all(|&v| v > 0.0) {
                    for (&p, &zv) in passive.iter().zip(z) {
                        x[p] = zv;
                    }
                    break;
                }
                let mut alpha = f64::INFINITY;
                let mut leaving = 0;
                for (t, (&p, &zv)) in passive.iter().zip(z).enumerate() {
                    if zv <= 0.0 {
                        let a = x[p] / (x[p] - zv);
                        if a < alpha {
                            alpha = a;
                            leaving = t;
                        }
                    }
                }
                for (&p, &zv) in passive.iter().zip(z) {
                    x[p] += alpha * (zv - x[p]);
                }
                x[passive[leaving]] = 0.0;
                let mut t = 0;
                while t < passive.len() {
                    let p = passive[t];
                    if x[p] <= 0.0 {
                        x[p] = 0.0;
                        in_passive[p] = false;
                        passive.remove(t);
                    } else {
                        t += 1;
                    }
                }
                if passive.is_empty() {
                    break;
                }
                while let Err(t) = self.lsq(passive, b, ws) {
                    // round-off made a surviving column look dependent: drop it
                    let p = passive.remove(t);
                    x[p] = 0.0;
                    in_passive[p] = false;
                    if passive.is_empty() {
                        break;
                    }
                }
                if passive.is_empty() {
                    break;
                }
            }
        }
        capped
    }

    /// Unconstrained least squares on the passive columns of the augmented
    /// system via Householder QR. `Err(t)` names a dependent column.
    fn lsq(&self, passive: &[usize], b: &[f64], ws: &mut Workspace) -> core::result::Result<(), usize> {
        let rows = self.dim() + 1;
        let p = passive.len();
        if p > rows {
            return Err(p - 1);
        }
        let a = &mut ws.a;
        a.clear();
        for &j in passive {
            a.extend_from_slice(self.vertices.row(j));
            a.push(PENALTY);
        }
        let rhs = &mut ws.rhs;
        rhs.clear();
        rhs.extend_from_slice(b);
        rhs.push(PENALTY);
        let h = &mut ws.h;

        for t in 0..p {
            let col = &a[t * rows..(t + 1) * rows];
            let norm = libm::sqrt(col[t..].iter().map(|v| v * v).sum::<f64>());
            if norm <= DEPENDENCE_TOL * self.aug_norms[passive[t]] {
                return Err(t);
            }
            let alpha = if col[t] > 0.0 { -norm } else { norm };
            h.clear();
            h.extend_from_slice(&col[t..]);
            h[0] -= alpha;
            let hh: f64 = h.iter().map(|v| v * v).sum();
            if hh > 0.0 {
                let scale = 2.0 / hh;
                for c in t + 1..p {
                    let cc = &mut a[c * rows + t..(c + 1) * rows];
                    let f = scale * dot(h, cc);
                    for (ci, &hi) in cc.iter_mut().zip(h.iter()) {
                        *ci -= f * hi;
                    }
                }
                let rr = &mut rhs[t..];
                let f = scale * dot(h, rr);
                for (ri, &hi) in rr.iter_mut().zip(h.iter()) {
                    *ri -= f * hi;
                }
            }
            a[t * rows + t] = alpha;
        }

        let z = &mut ws.z;
        z.clear();
        z.resize(p, 0.0);
        for t in (0..p).rev() {
            let mut s = rhs[t];
            for c in t + 1..p {
                s -= a[c * rows + t] * z[c];
            }
            z[t] = s / a[t * rows + t];
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
struct Workspace {
    a: Vec<f64>,
    rhs: Vec<f64>,
    h: Vec<f64>,
    z: Vec<f64>,
}

/// Reusable buffers for repeated solves.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    x: Vec<f64>,
    pub(crate) w: Vec<f64>,
    passive: Vec<usize>,
    in_passive: Vec<bool>,
    rejected: Vec<bool>,
    residual: Vec<f64>,
    ws: Workspace,
}

impl Scratch {
    fn reset(&mut self, k: usize, m: usize) {
        for v in [&mut self.x, &mut self.w] {
            v.clear();
            v.resize(k, 0.0);
        }
        for v in [&mut self.in_passive, &mut self.rejected] {
            v.clear();
            v.resize(k, false);
        }
        self.passive.clear();
        self.residual.clear();
        self.residual.resize(m, 0.0);
    }
}

/// Solves `min ‖A w − b‖²` over the simplex, with the candidate vectors as the
/// columns of `a` (m×k).
pub fn solve_simplex_ls(a: &Matrix, b: &[f64]) -> Result<SimplexWeights> {
    if a.cols() == 0 {
        return Err(Error::Dimension("simplex least squares needs k >= 1".into()));
    }
    if a.rows() != b.len() {
        return Err(Error::Dimension(alloc::format!("A has {} rows, b has {}", a.rows(), b.len())));
    }
    Ok(SimplexLs::new(a.transpose())?.solve(b)?.weights)
}
