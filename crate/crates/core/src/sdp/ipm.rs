//! Infeasible primal-dual path-following method for block-diagonal
//! semidefinite programs with a nonnegative orthant.
//!
//! Primal: minimise `c·x` over `X_b ⪰ 0`, `x ≥ 0` subject to
//! `⟨A_k, X⟩ + a_k·x = b_k`. Search directions use the HKM scaling with a
//! Mehrotra predictor-corrector step.

use std::time::Instant;

use faer::prelude::SpSolver;
use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, symmetrize, Matrix};

/// One summand of a constraint row.
#[derive(Debug, Clone)]
pub enum Term {
    /// `coef · (X[row,col] + X[col,row]) / 2` in a PSD block.
    Entry {
        block: usize,
        row: usize,
        col: usize,
        coef: f64,
    },
    /// `coef · vᵀ X v` with `v = vectors[vector]`.
    Rank1 {
        block: usize,
        vector: usize,
        coef: f64,
    },
    /// `coef · x[index]` on the orthant.
    Lp { index: usize, coef: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct ConicProblem {
    pub blocks: Vec<usize>,
    pub lp: usize,
    pub vectors: Vec<DVector<f64>>,
    pub rows: Vec<Vec<Term>>,
    pub rhs: Vec<f64>,
    pub lp_cost: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConicPoint {
    pub x: Vec<Matrix>,
    pub x_lp: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<Matrix>,
    pub z_lp: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct IpmOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
    pub deadline: Option<Instant>,
    /// When the iteration stalls, the best iterate within this factor of
    /// both tolerances is returned instead of an error.
    pub acceptable: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            feas_tol: 1e-10,
            max_iters: 100,
            step_fraction: 0.95,
            deadline: None,
            acceptable: 100.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IpmOutcome {
    pub point: ConicPoint,
    pub iterations: usize,
}

struct Residuals {
    rp: Vec<f64>,
    rd: Vec<Matrix>,
    rd_lp: Vec<f64>,
    primal: f64,
    dual: f64,
}

impl ConicProblem {
    pub fn apply(&self, x: &[Matrix], x_lp: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|t| self.term_value(t, x, x_lp)).sum())
            .collect()
    }

    fn term_value(&self, term: &Term, x: &[Matrix], x_lp: &[f64]) -> f64 {
        match *term {
            Term::Entry {
                block,
                row,
                col,
                coef,
            } => coef * 0.5 * (x[block][(row, col)] + x[block][(col, row)]),
            Term::Rank1 {
                block,
                vector,
                coef,
            } => {
                let v = &self.vectors[vector];
                coef * (&x[block] * v).dot(v)
            }
            Term::Lp { index, coef } => coef * x_lp[index],
        }
    }

    /// `Σ_k y_k A_k` split into PSD blocks and orthant part.
    pub fn adjoint(&self, y: &[f64]) -> (Vec<Matrix>, Vec<f64>) {
        let mut blocks: Vec<Matrix> = self.blocks.iter().map(|&s| Matrix::zeros(s, s)).collect();
        let mut lp = vec![0.0; self.lp];
        for (row, &yk) in self.rows.iter().zip(y) {
            if yk == 0.0 {
                continue;
            }
            for term in row {
                match *term {
                    Term::Entry {
                        block,
                        row,
                        col,
                        coef,
                    } => {
                        let m = &mut blocks[block];
                        if row == col {
                            m[(row, row)] += coef * yk;
                        } else {
                            m[(row, col)] += 0.5 * coef * yk;
                            m[(col, row)] += 0.5 * coef * yk;
                        }
                    }
                    Term::Rank1 {
                        block,
                        vector,
                        coef,
                    } => {
                        let v = &self.vectors[vector];
                        blocks[block].ger(coef * yk, v, v, 1.0);
                    }
                    Term::Lp { index, coef } => lp[index] += coef * yk,
                }
            }
        }
        (blocks, lp)
    }

    fn validate(&self, start: &[Matrix], start_lp: &[f64]) -> Result<()> {
        if self.rhs.len() != self.rows.len() || self.lp_cost.len() != self.lp {
            return Err(Error::Shape("conic problem dimensions are inconsistent".into()));
        }
        if start.len() != self.blocks.len() || start_lp.len() != self.lp {
            return Err(Error::Shape("starting point does not match the cone".into()));
        }
        for (m, &s) in start.iter().zip(&self.blocks) {
            if m.nrows() != s || m.ncols() != s {
                return Err(Error::Shape(format!("starting block is {}x{}, expected {s}x{s}", m.nrows(), m.ncols())));
            }
        }
        Ok(())
    }

    fn residuals(&self, p: &ConicPoint) -> Residuals {
        let ax = self.apply(&p.x, &p.x_lp);
        let rp: Vec<f64> = self.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let (aty, aty_lp) = self.adjoint(&p.y);
        let rd: Vec<Matrix> = aty.iter().zip(&p.z).map(|(a, z)| -(a + z)).collect();
        let rd_lp: Vec<f64> = (0..self.lp).map(|i| self.lp_cost[i] - aty_lp[i] - p.z_lp[i]).collect();
        let b_norm = 1.0 + inf_norm(&self.rhs);
        let c_norm = 1.0 + inf_norm(&self.lp_cost);
        let primal = inf_norm(&rp) / b_norm;
        let dual = rd
            .iter()
            .map(|m| m.amax())
            .fold(inf_norm(&rd_lp), f64::max)
            / c_norm;
        Residuals {
            rp,
            rd,
            rd_lp,
            primal,
            dual,
        }
    }

    /// Schur complement `M_kl = ⟨A_k, X A_l W⟩ + Σ a_k a_l x / z`.
    fn schur(&self, x: &[Matrix], w: &[Matrix], x_lp: &[f64], z_lp: &[f64]) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut schur = DMatrix::<f64>::zeros(m, m);
        let mut by_block: Vec<Vec<(usize, &Term)>> = vec![Vec::new(); self.blocks.len()];
        let mut by_lp: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.lp];
        for (k, row) in self.rows.iter().enumerate() {
            for term in row {
                match *term {
                    Term::Entry { block, .. } | Term::Rank1 { block, .. } => by_block[block].push((k, term)),
                    Term::Lp { index, coef } => by_lp[index].push((k, coef)),
                }
            }
        }

        for (b, terms) in by_block.iter().enumerate() {
            if terms.is_empty() {
                continue;
            }
            let xb = &x[b];
            let wb = &w[b];
            let s = xb.nrows();
            let xs = xb.as_slice();
            let ws = wb.as_slice();
            let at = |m: &[f64], i: usize, j: usize| m[i + j * s];
            // Cache X v and W v for rank-one terms.
            let cache: Vec<Option<(DVector<f64>, DVector<f64>)>> = terms
                .iter()
                .map(|(_, t)| match **t {
                    Term::Rank1 { vector, .. } => {
                        let v = &self.vectors[vector];
                        Some((xb * v, wb * v))
                    }
                    _ => None,
                })
                .collect();
            for p in 0..terms.len() {
                let (kp, tp) = terms[p];
                for q in p..terms.len() {
                    let (kq, tq) = terms[q];
                    let val = match (tp, tq) {
                        (
                            Term::Entry {
                                row: a,
                                col: bb,
                                coef: ca,
                                ..
                            },
                            Term::Entry {
                                row: c,
                                col: d,
                                coef: cb,
                                ..
                            },
                        ) => {
                            let (a, bb, c, d) = (*a, *bb, *c, *d);
                            0.25 * ca
                                * cb
                                * (at(xs, bb, c) * at(ws, d, a)
                                    + at(xs, bb, d) * at(ws, c, a)
                                    + at(xs, a, c) * at(ws, d, bb)
                                    + at(xs, a, d) * at(ws, c, bb))
                        }
                        (Term::Entry { row: a, col: bb, coef: ca, .. }, Term::Rank1 { coef: cb, .. }) => {
                            let (xv, wv) = cache[q].as_ref().expect("rank-one cache");
                            0.5 * ca * cb * (xv[*bb] * wv[*a] + xv[*a] * wv[*bb])
                        }
                        (Term::Rank1 { coef: ca, .. }, Term::Entry { row: a, col: bb, coef: cb, .. }) => {
                            let (xv, wv) = cache[p].as_ref().expect("rank-one cache");
                            0.5 * ca * cb * (xv[*bb] * wv[*a] + xv[*a] * wv[*bb])
                        }
                        (Term::Rank1 { vector: u, coef: ca, .. }, Term::Rank1 { coef: cb, .. }) => {
                            let u = &self.vectors[*u];
                            let (xv, wv) = cache[q].as_ref().expect("rank-one cache");
                            ca * cb * u.dot(xv) * u.dot(wv)
                        }
                        _ => unreachable!("orthant terms are grouped separately"),
                    };
                    schur[(kp, kq)] += val;
                    if p != q {
                        schur[(kq, kp)] += val;
                    }
                }
            }
        }

        for (i, terms) in by_lp.iter().enumerate() {
            let ratio = x_lp[i] / z_lp[i];
            for &(kp, cp) in terms {
                for &(kq, cq) in terms {
                    schur[(kp, kq)] += cp * cq * ratio;
                }
            }
        }
        schur
    }

    /// Runs the predictor-corrector iteration from a strictly feasible
    /// (or at least interior) primal start.
    pub fn solve(&self, start: Vec<Matrix>, start_lp: Vec<f64>, opts: &IpmOptions) -> Result<IpmOutcome> {
        self.validate(&start, &start_lp)?;
        let nu = (self.blocks.iter().sum::<usize>() + self.lp) as f64;
        let mut p = ConicPoint {
            z: self.blocks.iter().map(|&s| Matrix::identity(s, s)).collect(),
            z_lp: vec![1.0; self.lp],
            y: vec![0.0; self.rows.len()],
            x: start,
            x_lp: start_lp,
        };

        let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut fallback: Option<(f64, IpmOutcome)> = None;
        for iter in 0..opts.max_iters {
            let res = self.residuals(&p);
            let pobj = dot(&self.lp_cost, &p.x_lp);
            let dobj = dot(&self.rhs, &p.y);
            let complementarity: f64 = p.x.iter().zip(&p.z).map(|(x, z)| x.dot(z)).sum::<f64>() + dot(&p.x_lp, &p.z_lp);
            let mu = complementarity / nu;
            let rel_gap = (pobj - dobj).abs().max(complementarity) / (1.0 + pobj.abs() + dobj.abs());
            last = (res.primal, res.dual, rel_gap);
            if res.primal < opts.feas_tol && res.dual < opts.feas_tol && rel_gap < opts.gap_tol {
                return Ok(IpmOutcome {
                    point: p,
                    iterations: iter,
                });
            }
            let score = (res.primal.max(res.dual) / opts.feas_tol).max(rel_gap / opts.gap_tol);
            if score < opts.acceptable && fallback.as_ref().map_or(true, |(best, _)| score < *best) {
                let outcome = IpmOutcome {
                    point: p.clone(),
                    iterations: iter,
                };
                fallback = Some((score, outcome));
            }
            if opts.deadline.is_some_and(|d| Instant::now() > d) {
                return Err(Error::Timeout { iterations: iter });
            }
            if !dobj.is_finite() || dobj.abs() > 1e12 {
                return Err(Error::Infeasible(format!("dual objective diverged to {dobj:e}")));
            }

            let Some(w) = p.z.iter().map(spd_inverse).collect::<Option<Vec<Matrix>>>() else {
                return self.stalled(fallback, iter, last);
            };
            let schur = self.schur(&p.x, &w, &p.x_lp, &p.z_lp);
            let Some(chol) = factor(schur) else {
                return self.stalled(fallback, iter, last);
            };

            // Predictor.
            let h_pred: Vec<Matrix> = (0..p.x.len())
                .map(|b| -&p.x[b] - &p.x[b] * &res.rd[b] * &w[b])
                .collect();
            let h_pred_lp: Vec<f64> = (0..self.lp)
                .map(|i| -p.x_lp[i] - p.x_lp[i] * res.rd_lp[i] / p.z_lp[i])
                .collect();
            let pred = self.direction(&p, &w, &chol, &res, h_pred, h_pred_lp);
            let (dx_p, dx_p_lp, dz_p, dz_p_lp) = (pred.dx, pred.dx_lp, pred.dz, pred.dz_lp);
            let ap = self.step_bound(&p.x, &dx_p, &p.x_lp, &dx_p_lp).min(1.0);
            let ad = self.step_bound(&p.z, &dz_p, &p.z_lp, &dz_p_lp).min(1.0);
            let mut affine = 0.0;
            for b in 0..p.x.len() {
                affine += (&p.x[b] + &dx_p[b] * ap).dot(&(&p.z[b] + &dz_p[b] * ad));
            }
            for i in 0..self.lp {
                affine += (p.x_lp[i] + ap * dx_p_lp[i]) * (p.z_lp[i] + ad * dz_p_lp[i]);
            }
            let sigma = (affine / nu / mu).clamp(0.0, 1.0).powi(3);

            // Corrector.
            let h_corr: Vec<Matrix> = (0..p.x.len())
                .map(|b| {
                    &w[b] * (sigma * mu) - &p.x[b] - &dx_p[b] * &dz_p[b] * &w[b] - &p.x[b] * &res.rd[b] * &w[b]
                })
                .collect();
            let h_corr_lp: Vec<f64> = (0..self.lp)
                .map(|i| {
                    (sigma * mu - dx_p_lp[i] * dz_p_lp[i] - p.x_lp[i] * res.rd_lp[i]) / p.z_lp[i] - p.x_lp[i]
                })
                .collect();
            let d = self.direction(&p, &w, &chol, &res, h_corr, h_corr_lp);
            let gamma = opts.step_fraction;
            let ap = (gamma * self.step_bound(&p.x, &d.dx, &p.x_lp, &d.dx_lp)).min(1.0);
            let ad = (gamma * self.step_bound(&p.z, &d.dz, &p.z_lp, &d.dz_lp)).min(1.0);
            for b in 0..p.x.len() {
                p.x[b] = symmetrize(&(&p.x[b] + &d.dx[b] * ap));
                p.z[b] = symmetrize(&(&p.z[b] + &d.dz[b] * ad));
            }
            for i in 0..self.lp {
                p.x_lp[i] += ap * d.dx_lp[i];
                p.z_lp[i] += ad * d.dz_lp[i];
            }
            for (y, dy) in p.y.iter_mut().zip(&d.dy) {
                *y += ad * dy;
            }
        }
        self.stalled(fallback, opts.max_iters, last)
    }

    fn stalled(&self, fallback: Option<(f64, IpmOutcome)>, iterations: usize, last: (f64, f64, f64)) -> Result<IpmOutcome> {
        fallback.map(|(_, outcome)| outcome).ok_or_else(|| self.failure(iterations, last))
    }

    /// Solves for `(ΔX, Δy, ΔZ)` given the right-hand side `H` of
    /// `ΔX = H + X Aᵀ(Δy) W`.
    fn direction(
        &self,
        p: &ConicPoint,
        w: &[Matrix],
        chol: &SchurFactor,
        res: &Residuals,
        h: Vec<Matrix>,
        h_lp: Vec<f64>,
    ) -> Direction {
        let ah = self.apply(&h, &h_lp);
        let rhs: Vec<f64> = res.rp.iter().zip(&ah).map(|(r, a)| r - a).collect();
        let dy = chol.solve(rhs);
        let (aty, aty_lp) = self.adjoint(&dy);
        let mut dx = Vec::with_capacity(h.len());
        let mut dz = Vec::with_capacity(h.len());
        for (b, hb) in h.into_iter().enumerate() {
            dx.push(symmetrize(&(hb + &p.x[b] * &aty[b] * &w[b])));
            dz.push(&res.rd[b] - &aty[b]);
        }
        let dx_lp = (0..self.lp)
            .map(|i| h_lp[i] + p.x_lp[i] * aty_lp[i] / p.z_lp[i])
            .collect();
        let dz_lp = (0..self.lp).map(|i| res.rd_lp[i] - aty_lp[i]).collect();
        Direction {
            dx,
            dx_lp,
            dy,
            dz,
            dz_lp,
        }
    }

    /// Largest `α` keeping `X + αΔX` in the cone (may be infinite).
    fn step_bound(&self, x: &[Matrix], dx: &[Matrix], x_lp: &[f64], dx_lp: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for (xb, db) in x.iter().zip(dx) {
            let Some(chol) = Cholesky::new(xb.clone()) else {
                return 0.0;
            };
            let l = chol.l();
            let Some(t) = l.solve_lower_triangular(db) else {
                return 0.0;
            };
            let Some(s) = l.solve_lower_triangular(&t.transpose()) else {
                return 0.0;
            };
            let (vals, _) = symmetric_eigen(&symmetrize(&s));
            let lo = vals[0];
            if lo < 0.0 {
                alpha = alpha.min(-1.0 / lo);
            }
        }
        for (&v, &d) in x_lp.iter().zip(dx_lp) {
            if d < 0.0 {
                alpha = alpha.min(-v / d);
            }
        }
        alpha
    }

    fn failure(&self, iterations: usize, last: (f64, f64, f64)) -> Error {
        Error::SolverFailure {
            iterations,
            primal_residual: last.0,
            dual_residual: last.1,
            gap: last.2,
        }
    }
}

struct Direction {
    dx: Vec<Matrix>,
    dx_lp: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<Matrix>,
    dz_lp: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn spd_inverse(m: &Matrix) -> Option<Matrix> {
    Cholesky::new(m.clone()).map(|c| symmetrize(&c.inverse()))
}

/// Cholesky factor of a (possibly regularised) Schur complement, kept with
/// the original matrix for iterative refinement.
struct SchurFactor {
    matrix: DMatrix<f64>,
    chol: faer::solvers::Cholesky<f64>,
}

impl SchurFactor {
    const REFINEMENT_STEPS: usize = 3;

    fn raw_solve(&self, mut rhs: Vec<f64>) -> Vec<f64> {
        let n = rhs.len();
        self.chol
            .solve_in_place(faer::mat::from_column_major_slice_mut::<f64>(&mut rhs, n, 1));
        rhs
    }

    fn solve(&self, rhs: Vec<f64>) -> Vec<f64> {
        let b = DVector::from_vec(rhs.clone());
        let mut x = DVector::from_vec(self.raw_solve(rhs));
        for _ in 0..Self::REFINEMENT_STEPS {
            let r = &b - &self.matrix * &x;
            if r.amax() <= 1e-15 * b.amax() {
                break;
            }
            x += DVector::from_vec(self.raw_solve(r.as_slice().to_vec()));
        }
        x.as_slice().to_vec()
    }
}

/// Cholesky with escalating diagonal regularisation for near-singular
/// Schur complements late in the iteration.
fn factor(matrix: DMatrix<f64>) -> Option<SchurFactor> {
    let n = matrix.nrows();
    let scale = matrix.diagonal().amax().max(1.0);
    let mut m = matrix.clone();
    let mut shift = 0.0;
    for _ in 0..8 {
        let view = faer::mat::from_column_major_slice::<f64>(m.as_slice(), n, n);
        if let Ok(chol) = faer::solvers::Cholesky::try_new(view, faer::Side::Lower) {
            return Some(SchurFactor { matrix, chol });
        }
        let next = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
        for i in 0..n {
            m[(i, i)] += next - shift;
        }
        shift = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn primal(prob: &ConicProblem, out: &IpmOutcome) -> f64 {
        dot(&prob.lp_cost, &out.point.x_lp)
    }

    fn dual(prob: &ConicProblem, out: &IpmOutcome) -> f64 {
        dot(&prob.rhs, &out.point.y)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + b.abs())
    }

    #[test]
    fn lp_only_problem() {
        // min x0 + 2 x1 s.t. x0 + x1 = 1
        let prob = ConicProblem {
            blocks: vec![],
            lp: 2,
            vectors: vec![],
            rows: vec![vec![Term::Lp { index: 0, coef: 1.0 }, Term::Lp { index: 1, coef: 1.0 }]],
            rhs: vec![1.0],
            lp_cost: vec![1.0, 2.0],
        };
        let out = prob.solve(vec![], vec![0.5, 0.5], &IpmOptions::default()).unwrap();
        assert!(rel(primal(&prob, &out), 1.0) < 1e-8);
        assert!(out.point.x_lp[1] < 1e-8);
    }

    #[test]
    fn max_eigenvalue_via_slack() {
        // tr X = 1, ⟨C, X⟩ = p - q, minimise q - p  ->  -λ_max(C) = -3.
        let c = [[2.0, 1.0], [1.0, 2.0]];
        let mut row = vec![];
        for i in 0..2 {
            for j in i..2 {
                let coef = if i == j { c[i][j] } else { 2.0 * c[i][j] };
                row.push(Term::Entry {
                    block: 0,
                    row: i,
                    col: j,
                    coef,
                });
            }
        }
        row.push(Term::Lp { index: 0, coef: -1.0 });
        row.push(Term::Lp { index: 1, coef: 1.0 });
        let prob = ConicProblem {
            blocks: vec![2],
            lp: 2,
            vectors: vec![],
            rows: vec![
                vec![
                    Term::Entry {
                        block: 0,
                        row: 0,
                        col: 0,
                        coef: 1.0,
                    },
                    Term::Entry {
                        block: 0,
                        row: 1,
                        col: 1,
                        coef: 1.0,
                    },
                ],
                row,
            ],
            rhs: vec![1.0, 0.0],
            lp_cost: vec![-1.0, 1.0],
        };
        let start = vec![Matrix::identity(2, 2) * 0.5];
        let out = prob.solve(start, vec![3.0, 1.0], &IpmOptions::default()).unwrap();
        assert!(rel(primal(&prob, &out), -3.0) < 1e-7, "{}", primal(&prob, &out));
        assert!(rel(dual(&prob, &out), -3.0) < 1e-7);
    }

    #[test]
    fn rank_one_rows_match_entry_rows() {
        // minimise ε s.t. vᵀXv + ε - s = 1, tr X = 1, v = (1,1)/√2  -> ε = 0
        let v = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        let prob = ConicProblem {
            blocks: vec![2],
            lp: 2,
            vectors: vec![v],
            rows: vec![
                vec![
                    Term::Entry {
                        block: 0,
                        row: 0,
                        col: 0,
                        coef: 1.0,
                    },
                    Term::Entry {
                        block: 0,
                        row: 1,
                        col: 1,
                        coef: 1.0,
                    },
                ],
                vec![
                    Term::Rank1 {
                        block: 0,
                        vector: 0,
                        coef: 1.0,
                    },
                    Term::Lp { index: 0, coef: 1.0 },
                    Term::Lp { index: 1, coef: -1.0 },
                ],
            ],
            rhs: vec![1.0, 1.0],
            lp_cost: vec![1.0, 0.0],
        };
        let start = vec![Matrix::identity(2, 2) * 0.5];
        let out = prob.solve(start, vec![1.0, 0.5], &IpmOptions::default()).unwrap();
        assert!(primal(&prob, &out).abs() < 1e-7);
        let a = prob.apply(&out.point.x, &out.point.x_lp);
        assert!((a[1] - 1.0).abs() < 1e-8);
    }
}
