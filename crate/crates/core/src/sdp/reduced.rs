//! The query SDP in Walsh-character coordinates.
//!
//! Summing the constraints level by level, `Σ_i M_i^(0) = J` forces every
//! `M_i^(0)` onto the all-ones direction, and each later level only reaches
//! characters `χ_S` with `|S| ≤ j`. Writing `M_i^(j) = P_j Y_i^(j) P_jᵀ` with
//! the orthonormal character basis `P_j` therefore loses no feasible point,
//! turns every sign mask `E_i ∘ ·` into a relabelling `S ↦ S Δ {i}`, and
//! leaves a problem with a strictly feasible interior.

use nalgebra::DVector;

use crate::boolfn::{weight, BooleanFunction};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};

use super::ipm::{ConicPoint, ConicProblem, Term};

const ABSENT: usize = usize::MAX;

pub(crate) struct Reduction {
    n: usize,
    t: usize,
    size: usize,
    values: Vec<bool>,
    /// `levels[j]`: characters of degree at most `j`, ordered by degree.
    levels: Vec<Vec<usize>>,
    pos: Vec<Vec<usize>>,
    pub problem: ConicProblem,
}

/// Reduced unknowns lifted back to the full `2^n` coordinates.
pub(crate) struct Lifted {
    pub eps: f64,
    pub m: Vec<Vec<Matrix>>,
    pub gamma: [Matrix; 2],
}

impl Reduction {
    pub fn new(f: &BooleanFunction, t: usize) -> Self {
        let n = f.arity();
        let size = 1usize << n;
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by_key(|&s| (weight(s), s));
        let mut levels = Vec::with_capacity(t + 1);
        let mut pos = Vec::with_capacity(t + 1);
        for j in 0..=t {
            let level: Vec<usize> = order.iter().copied().filter(|&s| weight(s) <= j).collect();
            let mut p = vec![ABSENT; size];
            for (k, &s) in level.iter().enumerate() {
                p[s] = k;
            }
            levels.push(level);
            pos.push(p);
        }
        let mut red = Self {
            n,
            t,
            size,
            values: f.table().collect(),
            levels,
            pos,
            problem: ConicProblem::default(),
        };
        red.problem = red.build();
        red
    }

    fn mask(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            1 << (self.n - i)
        }
    }

    fn block(&self, j: usize, i: usize) -> usize {
        (j - 1) * (self.n + 1) + i
    }

    fn gamma_block(&self, z: usize) -> usize {
        (self.t - 1) * (self.n + 1) + z
    }

    pub fn eps_index(&self) -> usize {
        self.n + 1
    }

    fn slack_index(&self, x: usize) -> usize {
        self.n + 2 + x
    }

    fn character_row(&self, x: usize) -> DVector<f64> {
        let scale = 1.0 / (self.size as f64).sqrt();
        DVector::from_iterator(
            self.levels[self.t].len(),
            self.levels[self.t]
                .iter()
                .map(|&s| if weight(x & s) % 2 == 0 { scale } else { -scale }),
        )
    }

    /// Orthonormal character basis `P_j` as an `N × r_j` matrix.
    fn basis(&self, j: usize) -> Matrix {
        let scale = 1.0 / (self.size as f64).sqrt();
        Matrix::from_fn(self.size, self.levels[j].len(), |x, k| {
            if weight(x & self.levels[j][k]) % 2 == 0 {
                scale
            } else {
                -scale
            }
        })
    }

    fn previous(&self, j: usize, i: usize, a: usize, b: usize, coef: f64) -> Term {
        if j == 0 {
            Term::Lp { index: i, coef }
        } else {
            Term::Entry {
                block: self.block(j, i),
                row: a,
                col: b,
                coef,
            }
        }
    }

    fn build(&self) -> ConicProblem {
        let (n, t) = (self.n, self.t);
        let mut blocks = Vec::new();
        for j in 1..t {
            blocks.extend(std::iter::repeat(self.levels[j].len()).take(n + 1));
        }
        blocks.extend([self.levels[t].len(); 2]);
        let lp = n + 2 + self.size;

        let mut rows = vec![(0..=n).map(|i| Term::Lp { index: i, coef: 1.0 }).collect::<Vec<_>>()];
        let mut rhs = vec![self.size as f64];

        for j in 1..=t {
            let r = self.levels[j].len();
            for a in 0..r {
                for b in a..r {
                    let mut row: Vec<Term> = if j < t {
                        (0..=n)
                            .map(|i| Term::Entry {
                                block: self.block(j, i),
                                row: a,
                                col: b,
                                coef: 1.0,
                            })
                            .collect()
                    } else {
                        (0..2)
                            .map(|z| Term::Entry {
                                block: self.gamma_block(z),
                                row: a,
                                col: b,
                                coef: 1.0,
                            })
                            .collect()
                    };
                    for i in 0..=n {
                        let m = self.mask(i);
                        let pa = self.pos[j - 1][self.levels[j][a] ^ m];
                        let pb = self.pos[j - 1][self.levels[j][b] ^ m];
                        if pa != ABSENT && pb != ABSENT {
                            row.push(self.previous(j - 1, i, pa, pb, -1.0));
                        }
                    }
                    rows.push(row);
                    rhs.push(0.0);
                }
            }
        }

        let vectors: Vec<DVector<f64>> = (0..self.size).map(|x| self.character_row(x)).collect();
        for x in 0..self.size {
            rows.push(vec![
                Term::Rank1 {
                    block: self.gamma_block(self.values[x] as usize),
                    vector: x,
                    coef: 1.0,
                },
                Term::Lp {
                    index: self.eps_index(),
                    coef: 1.0,
                },
                Term::Lp {
                    index: self.slack_index(x),
                    coef: -1.0,
                },
            ]);
            rhs.push(1.0);
        }

        let mut lp_cost = vec![0.0; lp];
        lp_cost[self.eps_index()] = 1.0;
        ConicProblem {
            blocks,
            lp,
            vectors,
            rows,
            rhs,
            lp_cost,
        }
    }

    /// Strictly feasible start: uniform weight on every query index and an
    /// even split between the two output matrices, at error `eps`.
    pub fn start(&self, eps: f64) -> (Vec<Matrix>, Vec<f64>) {
        let n = self.n;
        let share = 1.0 / (n + 1) as f64;
        let mut lp = vec![0.0; self.problem.lp];
        let y0 = self.size as f64 * share;
        lp[..=n].iter_mut().for_each(|v| *v = y0);
        let mut prev: Vec<Matrix> = (0..=n).map(|_| Matrix::from_element(1, 1, y0)).collect();
        let mut blocks = Vec::new();
        for j in 1..=self.t {
            let r = self.levels[j].len();
            let mut g = Matrix::zeros(r, r);
            for (i, y) in prev.iter().enumerate() {
                let m = self.mask(i);
                let idx: Vec<usize> = self.levels[j - 1].iter().map(|&s| self.pos[j][s ^ m]).collect();
                for (a, &pa) in idx.iter().enumerate() {
                    for (b, &pb) in idx.iter().enumerate() {
                        g[(pa, pb)] += y[(a, b)];
                    }
                }
            }
            if j < self.t {
                let y = g * share;
                blocks.extend(std::iter::repeat(y.clone()).take(n + 1));
                prev = vec![y; n + 1];
            } else {
                let half = g * 0.5;
                blocks.push(half.clone());
                blocks.push(half);
            }
        }
        lp[self.eps_index()] = eps;
        let gamma = &blocks[blocks.len() - 2];
        for x in 0..self.size {
            let v = &self.problem.vectors[x];
            lp[self.slack_index(x)] = (gamma * v).dot(v) - 1.0 + eps;
        }
        (blocks, lp)
    }

    pub fn lift(&self, x: &[Matrix], x_lp: &[f64]) -> Lifted {
        let (n, t) = (self.n, self.t);
        let ones = Matrix::from_element(self.size, self.size, 1.0 / self.size as f64);
        let bases: Vec<Matrix> = (0..=t).map(|j| self.basis(j)).collect();
        let lift = |j: usize, y: &Matrix| &bases[j] * y * bases[j].transpose();
        let m = (0..=n)
            .map(|i| {
                (0..t)
                    .map(|j| {
                        if j == 0 {
                            &ones * x_lp[i]
                        } else {
                            lift(j, &x[self.block(j, i)])
                        }
                    })
                    .collect()
            })
            .collect();
        Lifted {
            eps: x_lp[self.eps_index()],
            m,
            gamma: [lift(t, &x[self.gamma_block(0)]), lift(t, &x[self.gamma_block(1)])],
        }
    }
}

/// Fixed-error margin problem: maximise `λ` such that every cone variable
/// of the base problem stays `λ` inside its cone, with `λ ∈ [-1, 1]`.
///
/// Substituting `V = V' + λ I` with `μ = λ + 1 ≥ 0` and `μ + w = 2` keeps
/// the standard form. Orthant coordinates listed in `fixed` are replaced by
/// constants and their columns pinned to one.
pub(crate) struct MarginProblem {
    pub problem: ConicProblem,
    mu_index: usize,
    fixed: Vec<(usize, f64)>,
}

impl MarginProblem {
    pub fn new(base: &ConicProblem, fixed: &[(usize, f64)]) -> Self {
        let mu = base.lp;
        let pinned = |index: usize| fixed.iter().find(|(k, _)| *k == index).map(|&(_, v)| v);
        let mut rows = Vec::with_capacity(base.rows.len() + fixed.len() + 1);
        let mut rhs = Vec::with_capacity(rows.capacity());
        for (row, &b) in base.rows.iter().zip(&base.rhs) {
            let mut kept = Vec::with_capacity(row.len() + 1);
            let mut shift = 0.0;
            let mut b = b;
            for term in row {
                match *term {
                    Term::Lp { index, coef } => match pinned(index) {
                        Some(v) => b -= coef * v,
                        None => {
                            shift += coef;
                            kept.push(term.clone());
                        }
                    },
                    Term::Entry { row, col, coef, .. } => {
                        if row == col {
                            shift += coef;
                        }
                        kept.push(term.clone());
                    }
                    Term::Rank1 { vector, coef, .. } => {
                        shift += coef * base.vectors[vector].norm_squared();
                        kept.push(term.clone());
                    }
                }
            }
            kept.push(Term::Lp { index: mu, coef: shift });
            rows.push(kept);
            rhs.push(b + shift);
        }
        for &(index, _) in fixed {
            rows.push(vec![Term::Lp { index, coef: 1.0 }]);
            rhs.push(1.0);
        }
        rows.push(vec![Term::Lp { index: mu, coef: 1.0 }, Term::Lp { index: mu + 1, coef: 1.0 }]);
        rhs.push(2.0);
        let mut lp_cost = vec![0.0; base.lp + 2];
        lp_cost[mu] = -1.0;
        Self {
            problem: ConicProblem {
                blocks: base.blocks.clone(),
                lp: base.lp + 2,
                vectors: base.vectors.clone(),
                rows,
                rhs,
                lp_cost,
            },
            mu_index: mu,
            fixed: fixed.to_vec(),
        }
    }

    /// Shifts a base point satisfying the equalities into the interior of
    /// the margin problem.
    pub fn start(&self, x: &[Matrix], x_lp: &[f64]) -> Result<(Vec<Matrix>, Vec<f64>)> {
        let free = |k: &usize| !self.fixed.iter().any(|(i, _)| i == k);
        let mut lo = (0..x_lp.len()).filter(free).map(|k| x_lp[k]).fold(f64::INFINITY, f64::min);
        for m in x {
            let (vals, _) = symmetric_eigen(m);
            lo = lo.min(vals[0]);
        }
        let lambda = lo.min(1.0) - 0.25;
        if lambda <= -1.0 {
            return Err(Error::Infeasible("no interior start for the margin problem".into()));
        }
        let blocks = x
            .iter()
            .map(|m| m - Matrix::identity(m.nrows(), m.ncols()) * lambda)
            .collect();
        let mut lp: Vec<f64> = (0..x_lp.len())
            .map(|k| if free(&k) { x_lp[k] - lambda } else { 1.0 })
            .collect();
        lp.push(lambda + 1.0);
        lp.push(1.0 - lambda);
        Ok((blocks, lp))
    }

    pub fn margin(&self, point: &ConicPoint) -> f64 {
        point.x_lp[self.mu_index] - 1.0
    }

    /// Recovers the base variables `V = V' + λ I`.
    pub fn recover(&self, point: &ConicPoint) -> (Vec<Matrix>, Vec<f64>) {
        let lambda = self.margin(point);
        let blocks = point
            .x
            .iter()
            .map(|m| m + Matrix::identity(m.nrows(), m.ncols()) * lambda)
            .collect();
        let mut lp: Vec<f64> = point.x_lp[..self.mu_index].iter().map(|v| v + lambda).collect();
        for &(index, value) in &self.fixed {
            lp[index] = value;
        }
        (blocks, lp)
    }
}
