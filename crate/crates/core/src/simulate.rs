//! State-vector simulation in the phase-oracle model, plus two hand-built
//! two-query algorithms.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::boolfn::{input_bit, weight, BooleanFunction};
use crate::error::{Error, Result};
use crate::extract::{complexify, QueryAlgorithm, DIM_OUT};
use crate::linalg::{complete_isometry, symmetric_eigen, transition_unitary, CMatrix, Matrix};

/// Deviation from unitarity tolerated by [`run`].
pub const UNITARITY_TOL: f64 = 1e-8;

pub type State = DVector<Complex64>;

/// `O_x |i⟩ = (-1)^{x_i} |i⟩` on the input register, with `x_0 = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSpec {
    bits: Vec<bool>,
}

impl OracleSpec {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Input `x` in the same bit order as truth-table indices.
    pub fn from_index(x: usize, n: usize) -> Self {
        Self::new((1..=n).map(|i| input_bit(x, i, n)).collect())
    }

    pub fn arity(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn sign(&self, i: usize) -> f64 {
        if i > 0 && self.bits[i - 1] {
            -1.0
        } else {
            1.0
        }
    }

    pub fn apply(&self, alg: &QueryAlgorithm, state: &mut State) {
        let block = alg.dims()[1] * DIM_OUT;
        for (i, chunk) in state.as_mut_slice().chunks_mut(block).enumerate() {
            if self.sign(i) < 0.0 {
                chunk.iter_mut().for_each(|a| *a = -*a);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputDistribution {
    pub p0: f64,
    pub p1: f64,
}

impl OutputDistribution {
    pub fn probability(&self, z: bool) -> f64 {
        if z {
            self.p1
        } else {
            self.p0
        }
    }
}

pub fn check_unitary(alg: &QueryAlgorithm) -> Result<()> {
    let err = alg.unitarity_error();
    if err > UNITARITY_TOL {
        return Err(Error::InvalidAlgorithm(format!("unitaries deviate from unitarity by {err:e}")));
    }
    Ok(())
}

fn check_arity(alg: &QueryAlgorithm, x: &OracleSpec) -> Result<()> {
    if x.arity() != alg.arity() {
        return Err(Error::Shape(format!(
            "oracle has {} bits but the algorithm addresses {}",
            x.arity(),
            alg.arity()
        )));
    }
    Ok(())
}

fn initial_state(alg: &QueryAlgorithm) -> State {
    let mut s = State::zeros(alg.dim());
    s[0] = Complex64::new(1.0, 0.0);
    s
}

/// States after each `U_j`: entry `j` precedes query `j + 1`, the last entry
/// is the state that gets measured.
pub fn trajectory(alg: &QueryAlgorithm, x: &OracleSpec) -> Result<Vec<State>> {
    check_arity(alg, x)?;
    check_unitary(alg)?;
    Ok(trajectory_unchecked(alg, x))
}

fn trajectory_unchecked(alg: &QueryAlgorithm, x: &OracleSpec) -> Vec<State> {
    let mut out = Vec::with_capacity(alg.unitaries().len());
    let mut state = initial_state(alg);
    for (j, u) in alg.unitaries().iter().enumerate() {
        if j > 0 {
            x.apply(alg, &mut state);
        }
        state = u * state;
        out.push(state.clone());
    }
    out
}

pub fn final_state(alg: &QueryAlgorithm, x: &OracleSpec) -> Result<State> {
    Ok(trajectory(alg, x)?.pop().expect("at least one unitary"))
}

pub fn measure(state: &State) -> OutputDistribution {
    let (mut p0, mut p1) = (0.0, 0.0);
    for (k, a) in state.iter().enumerate() {
        if k % DIM_OUT == 0 {
            p0 += a.norm_sqr();
        } else {
            p1 += a.norm_sqr();
        }
    }
    OutputDistribution { p0, p1 }
}

pub fn run(alg: &QueryAlgorithm, x: &OracleSpec) -> Result<OutputDistribution> {
    check_arity(alg, x)?;
    check_unitary(alg)?;
    Ok(run_unchecked(alg, x))
}

pub(crate) fn run_unchecked(alg: &QueryAlgorithm, x: &OracleSpec) -> OutputDistribution {
    measure(trajectory_unchecked(alg, x).last().expect("at least one unitary"))
}

/// Worst-case probability of answering `f(x)`.
pub fn min_success(alg: &QueryAlgorithm, f: &BooleanFunction) -> Result<f64> {
    Ok(crate::extract::success_profile(alg, f)?
        .into_iter()
        .fold(1.0, f64::min))
}

/// An algorithm for a partial function: `expected[x]` is `None` outside the
/// promise.
#[derive(Debug, Clone, PartialEq)]
pub struct PromiseAlgorithm {
    pub algorithm: QueryAlgorithm,
    pub expected: Vec<Option<bool>>,
}

impl PromiseAlgorithm {
    pub fn new(algorithm: QueryAlgorithm, expected: Vec<Option<bool>>) -> Result<Self> {
        if expected.len() != 1usize << algorithm.arity() {
            return Err(Error::Shape("promise table must cover every input".into()));
        }
        Ok(Self { algorithm, expected })
    }

    pub fn arity(&self) -> usize {
        self.algorithm.arity()
    }

    pub fn in_promise(&self, x: usize) -> bool {
        self.expected[x].is_some()
    }

    /// Worst-case success over promise inputs.
    pub fn min_success(&self) -> Result<f64> {
        check_unitary(&self.algorithm)?;
        let n = self.arity();
        Ok(self
            .expected
            .iter()
            .enumerate()
            .filter_map(|(x, z)| z.map(|z| run_unchecked(&self.algorithm, &OracleSpec::from_index(x, n)).probability(z)))
            .fold(1.0, f64::min))
    }
}

fn kron_out(u: &CMatrix) -> CMatrix {
    let d = u.nrows();
    let mut full = CMatrix::zeros(d * DIM_OUT, d * DIM_OUT);
    for r in 0..d {
        for c in 0..d {
            for o in 0..DIM_OUT {
                full[(r * DIM_OUT + o, c * DIM_OUT + o)] = u[(r, c)];
            }
        }
    }
    full
}

/// Orthogonal matrix whose first column is the unit vector `v`.
fn rotation_from_first(v: &Matrix) -> Matrix {
    complete_isometry(v).expect("unit vector")
}

/// Two queries for EXACT₂ on four bits without workspace: prepare
/// `½ Σ_{i≥1} |i⟩`, query, apply `U`, query, then answer 1 iff the state is
/// back on the starting vector.
pub fn exact2_algorithm() -> QueryAlgorithm {
    let psi = Matrix::from_column_slice(5, 1, &[0.0, 0.5, 0.5, 0.5, 0.5]);
    let q = rotation_from_first(&psi);
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let w2 = w * w;
    #[rustfmt::skip]
    let entries = [
        zero, one, one, one, one,
        one, zero, one, w, w2,
        one, one, zero, w2, w,
        one, w, w2, zero, one,
        one, w2, w, one, zero,
    ];
    let u = CMatrix::from_row_slice(5, 5, &entries) * Complex64::new(0.5, 0.0);

    let mut finish = kron_out(&complexify(&q.transpose()));
    finish.swap_rows(0, 1);
    QueryAlgorithm::new(5, 1, vec![kron_out(&complexify(&q)), kron_out(&u), finish]).expect("valid dimensions")
}

/// Coefficients of the balanced-versus-extreme-weight algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalancedParameters {
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl BalancedParameters {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 == 1 {
            return Err(Error::Parameter(format!("n must be even and at least 4, got {n}")));
        }
        let nf = n as f64;
        let alpha2 = (nf.powi(3) - 6.0 * nf * nf + 12.0 * nf - 12.0) / (nf * (nf - 2.0));
        Ok(Self {
            n,
            c: -1.0 / (nf - 1.0),
            alpha: alpha2.sqrt(),
            beta: 2.0 * (nf - 1.0) / (nf * (nf - 2.0).sqrt()),
            gamma: -2.0 / (nf - 2.0).sqrt(),
        })
    }

    /// Residuals of the norm and overlap conditions making `τ_i ↦ U τ_i`
    /// an isometry.
    pub fn isometry_residuals(&self) -> [f64; 2] {
        let Self {
            n,
            c,
            alpha,
            beta,
            gamma,
        } = *self;
        let nf = n as f64;
        [
            alpha * alpha + (nf - 1.0) * beta * beta + (gamma + beta).powi(2) - nf,
            alpha * alpha + (nf - 2.0) * beta * beta * c + 2.0 * (gamma + beta) * beta * c - (nf - 4.0),
        ]
    }

    /// Residuals of the orthogonality conditions against weight-0 and
    /// weight-1 inputs.
    pub fn orthogonality_residuals(&self) -> [f64; 2] {
        let Self { n, c, beta, gamma, .. } = *self;
        let nf = n as f64;
        [
            gamma * beta * (2.0 + (nf - 2.0) * c) + gamma * gamma,
            2.0 * beta * beta * (1.0 - c) + gamma * beta * (2.0 - nf * c) + gamma * gamma,
        ]
    }

    /// Unit simplex vectors `a_1..a_n` in ancilla coordinates `1..=n`;
    /// coordinate 0 is the extra orthogonal direction.
    pub fn simplex(&self) -> Vec<DVector<f64>> {
        let n = self.n;
        let nf = n as f64;
        let scale = (nf / (nf - 1.0)).sqrt();
        (0..n)
            .map(|k| {
                let mut a = DVector::zeros(n + 1);
                for m in 0..n {
                    a[m + 1] = scale * if m == k { (nf - 1.0) / nf } else { -1.0 / nf };
                }
                a
            })
            .collect()
    }
}

/// Two queries distinguishing Hamming weight `n/2` (output 1) from weights
/// `{0, 1, n-1, n}` (output 0).
pub fn balanced_algorithm(n: usize) -> Result<PromiseAlgorithm> {
    let p = BalancedParameters::new(n)?;
    let d = n + 1;
    let dim = d * d;
    let at = |i: usize, w: usize| i * d + w;
    let a = p.simplex();

    let mut phi = Matrix::zeros(dim, 1);
    for i in 1..=n {
        phi[(at(i, 0), 0)] = 1.0;
    }
    let phi_unit = &phi / phi.norm();

    let mut tau = Matrix::zeros(dim, n);
    let mut image = Matrix::zeros(dim, n);
    for i in 1..=n {
        let col = i - 1;
        tau.set_column(col, &phi.column(0));
        tau[(at(i, 0), col)] = -1.0;
        image[(at(0, 0), col)] = p.alpha;
        for j in 1..=n {
            let k = (j + n - i) % n;
            for w in 0..d {
                image[(at(j, w), col)] += p.beta * a[k][w];
            }
        }
        for w in 0..d {
            image[(at(i, w), col)] += p.gamma * a[0][w];
        }
    }
    let u = transition_unitary(&image, &tau, 1e-9)?;

    let v = |bits: &OracleSpec| -> DVector<f64> {
        let sign = |k: usize| bits.sign(k / d);
        let mut s = phi_unit.column(0).clone_owned();
        s.iter_mut().enumerate().for_each(|(k, a)| *a *= sign(k));
        let mut s = &u * s;
        s.iter_mut().enumerate().for_each(|(k, a)| *a *= sign(k));
        s
    };

    let extreme: Vec<usize> = (0..1usize << n)
        .filter(|&x| matches!(weight(x), w if w <= 1 || w + 1 >= n))
        .collect();
    let mut span = Matrix::zeros(dim, extreme.len());
    for (col, &x) in extreme.iter().enumerate() {
        span.set_column(col, &v(&OracleSpec::from_index(x, n)));
    }
    let (values, vectors) = symmetric_eigen(&(&span * span.transpose()));
    let mut projector = Matrix::zeros(dim, dim);
    for k in 0..dim {
        if values[k] > 1e-9 {
            let e = vectors.column(k);
            projector += &e * e.transpose();
        }
    }

    let mut finish = CMatrix::zeros(dim * DIM_OUT, dim * DIM_OUT);
    let complement = Matrix::identity(dim, dim) - &projector;
    for r in 0..dim {
        for c in 0..dim {
            let inside = Complex64::new(projector[(r, c)], 0.0);
            let outside = Complex64::new(complement[(r, c)], 0.0);
            finish[(r * DIM_OUT, c * DIM_OUT)] = inside;
            finish[(r * DIM_OUT + 1, c * DIM_OUT + 1)] = inside;
            finish[(r * DIM_OUT + 1, c * DIM_OUT)] = outside;
            finish[(r * DIM_OUT, c * DIM_OUT + 1)] = outside;
        }
    }

    let prepare = kron_out(&complexify(&rotation_from_first(&phi_unit)));
    let algorithm = QueryAlgorithm::new(d, d, vec![prepare, kron_out(&complexify(&u)), finish])?;
    let expected = (0..1usize << n)
        .map(|x| match weight(x) {
            w if w * 2 == n => Some(true),
            w if w <= 1 || w + 1 >= n => Some(false),
            _ => None,
        })
        .collect();
    PromiseAlgorithm::new(algorithm, expected)
}
