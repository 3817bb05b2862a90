//! Explicit query algorithms recovered from SDP solutions.
//!
//! The state before query `j+1` on input `x` is
//! `|ψ_x^(j)⟩ = Σ_i |i⟩ ⊗ √M_i^(j) |x⟩`; the oracle turns it into
//! `|φ_x^(j+1)⟩ = Σ_i (-1)^{x_i} |i⟩ ⊗ √M_i^(j) |x⟩`. The SDP constraints say
//! exactly that consecutive Φ and Ψ share a Gram matrix, so an orthogonal
//! `U_j` with `U_j Φ^(j) = Ψ^(j)` exists.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::boolfn::{input_bit, BooleanFunction};
use crate::error::{Error, Result};
use crate::linalg::{gram_factor, psd_sqrt, transition_unitary_with_cutoff, CMatrix, Matrix};
use crate::sdp::{SdpSolution, SolverConfig};
use crate::simulate;

/// Dimension of the output register.
pub const DIM_OUT: usize = 2;

/// Gram mismatch accepted during extraction, relative to the solver's
/// feasibility tolerance.
pub const GRAM_TOL_FACTOR: f64 = 100.0;

/// Eigenvalue threshold defining the rank of a solution matrix.
pub const RANK_TOL: f64 = 1e-8;

const SPAN_CUTOFF: f64 = 1e-12;

/// `U_t O_x U_{t-1} ⋯ O_x U_0 |0,0,0⟩` on `H_in ⊗ H_work ⊗ H_out`, with the
/// output register measured at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryAlgorithm {
    dim_in: usize,
    dim_work: usize,
    unitaries: Vec<CMatrix>,
}

impl QueryAlgorithm {
    pub fn new(dim_in: usize, dim_work: usize, unitaries: Vec<CMatrix>) -> Result<Self> {
        if dim_in == 0 || dim_work == 0 {
            return Err(Error::InvalidAlgorithm("register dimensions must be positive".into()));
        }
        if unitaries.is_empty() {
            return Err(Error::InvalidAlgorithm("at least one unitary is required".into()));
        }
        let dim = dim_in * dim_work * DIM_OUT;
        if let Some(u) = unitaries.iter().find(|u| u.shape() != (dim, dim)) {
            return Err(Error::Shape(format!(
                "unitary is {}x{}, expected {dim}x{dim}",
                u.nrows(),
                u.ncols()
            )));
        }
        Ok(Self {
            dim_in,
            dim_work,
            unitaries,
        })
    }

    /// Number of oracle calls.
    pub fn t(&self) -> usize {
        self.unitaries.len() - 1
    }

    /// Number of input bits the oracle register addresses.
    pub fn arity(&self) -> usize {
        self.dim_in - 1
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.dim_in, self.dim_work, DIM_OUT]
    }

    pub fn dim(&self) -> usize {
        self.dim_in * self.dim_work * DIM_OUT
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    pub fn unitaries_mut(&mut self) -> &mut [CMatrix] {
        &mut self.unitaries
    }

    /// Basis index of `|i⟩|w⟩|o⟩`.
    pub fn index(&self, i: usize, w: usize, o: usize) -> usize {
        (i * self.dim_work + w) * DIM_OUT + o
    }

    /// Largest `‖U†U - I‖_max` over all steps.
    pub fn unitarity_error(&self) -> f64 {
        let id = CMatrix::identity(self.dim(), self.dim());
        self.unitaries
            .iter()
            .map(|u| (u.adjoint() * u - &id).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("algorithm serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Serialize for QueryAlgorithm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let unitaries: Vec<Vec<Vec<Entry>>> = self
            .unitaries
            .iter()
            .map(|u| {
                u.row_iter()
                    .map(|row| {
                        row.iter()
                            .map(|z| {
                                if z.im == 0.0 {
                                    Entry::Real(z.re)
                                } else {
                                    Entry::Complex([z.re, z.im])
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut s = serializer.serialize_struct("QueryAlgorithm", 3)?;
        s.serialize_field("t", &self.t())?;
        s.serialize_field("dims", &self.dims())?;
        s.serialize_field("unitaries", &unitaries)?;
        s.end()
    }
}

#[derive(Deserialize)]
struct RawAlgorithm {
    t: usize,
    dims: [usize; 3],
    unitaries: Vec<Vec<Vec<Entry>>>,
}

impl<'de> Deserialize<'de> for QueryAlgorithm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawAlgorithm::deserialize(deserializer)?;
        if raw.dims[2] != DIM_OUT {
            return Err(D::Error::custom(format!("output register must have dimension {DIM_OUT}")));
        }
        if raw.unitaries.len() != raw.t + 1 {
            return Err(D::Error::custom(format!(
                "expected {} unitaries for t = {}, found {}",
                raw.t + 1,
                raw.t,
                raw.unitaries.len()
            )));
        }
        let dim = raw.dims.iter().product::<usize>();
        let mut unitaries = Vec::with_capacity(raw.unitaries.len());
        for rows in &raw.unitaries {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(D::Error::custom(format!("unitaries must be {dim}x{dim}")));
            }
            unitaries.push(CMatrix::from_fn(dim, dim, |r, c| match rows[r][c] {
                Entry::Real(re) => Complex64::new(re, 0.0),
                Entry::Complex([re, im]) => Complex64::new(re, im),
            }));
        }
        QueryAlgorithm::new(raw.dims[0], raw.dims[1], unitaries).map_err(D::Error::custom)
    }
}

pub fn complexify(m: &Matrix) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Extracts an algorithm accepting Gram mismatches up to
/// `GRAM_TOL_FACTOR` times the default solver feasibility tolerance.
pub fn extract_algorithm(sol: &SdpSolution, reduce_rank: bool) -> Result<QueryAlgorithm> {
    extract_with_tolerance(sol, reduce_rank, GRAM_TOL_FACTOR * SolverConfig::default().feas_tol)
}

pub fn extract_with_tolerance(sol: &SdpSolution, reduce_rank: bool, gram_tol: f64) -> Result<QueryAlgorithm> {
    let (n, t) = (sol.n, sol.t);
    let size = 1usize << n;
    if t == 0 || sol.m.len() != n + 1 || sol.m.iter().any(|row| row.len() != t) {
        return Err(Error::Shape(format!("solution must hold {} x {t} matrices", n + 1)));
    }
    let dim_in = n + 1;
    let dim_work = if reduce_rank {
        sol.max_rank(RANK_TOL).max(1)
    } else {
        size
    };

    let factor = |m: &Matrix, step: usize| -> Result<Matrix> {
        if m.shape() != (size, size) {
            return Err(Error::Shape(format!("expected {size}x{size} matrices")));
        }
        let b = if reduce_rank {
            gram_factor(m, RANK_TOL)
        } else {
            psd_sqrt(m, gram_tol).map_err(|e| Error::Extraction {
                step,
                reason: e.to_string(),
            })?
        };
        let mut padded = Matrix::zeros(dim_work, size);
        padded.view_mut((0, 0), (b.nrows(), size)).copy_from(&b);
        Ok(padded)
    };

    let mut psi = Vec::with_capacity(t);
    for j in 0..t {
        let mut states = Matrix::zeros(dim_in * dim_work, size);
        for i in 0..dim_in {
            let b = factor(&sol.m[i][j], j)?;
            states.view_mut((i * dim_work, 0), (dim_work, size)).copy_from(&b);
        }
        psi.push(states);
    }

    let query = |states: &Matrix| -> Matrix {
        let mut out = states.clone();
        for x in 0..size {
            for i in 1..dim_in {
                if input_bit(x, i, n) {
                    for w in 0..dim_work {
                        out[(i * dim_work + w, x)] *= -1.0;
                    }
                }
            }
        }
        out
    };

    let transition = |target: &Matrix, source: &Matrix, step: usize| -> Result<Matrix> {
        transition_unitary_with_cutoff(&normalised(target), &normalised(source), gram_tol, SPAN_CUTOFF).map_err(|e| {
            Error::Extraction {
                step,
                reason: e.to_string(),
            }
        })
    };

    let dim = dim_in * dim_work * DIM_OUT;
    let mut unitaries = Vec::with_capacity(t + 1);
    let mut start = Matrix::zeros(dim_in * dim_work, size);
    start.row_mut(0).fill(1.0);
    for j in 0..t {
        let source = if j == 0 { start.clone() } else { query(&psi[j - 1]) };
        let u = transition(&psi[j], &source, j)?;
        let mut full = Matrix::zeros(dim, dim);
        for r in 0..u.nrows() {
            for c in 0..u.ncols() {
                for o in 0..DIM_OUT {
                    full[(r * DIM_OUT + o, c * DIM_OUT + o)] = u[(r, c)];
                }
            }
        }
        unitaries.push(complexify(&full));
    }

    let phased = query(&psi[t - 1]);
    let mut source = Matrix::zeros(dim, size);
    for r in 0..phased.nrows() {
        source.row_mut(r * DIM_OUT).copy_from(&phased.row(r));
    }
    let mut target = Matrix::zeros(dim, size);
    for (z, gamma) in [&sol.gamma0, &sol.gamma1].into_iter().enumerate() {
        let b = factor(gamma, t)?;
        for w in 0..dim_work {
            target.row_mut(w * DIM_OUT + z).copy_from(&b.row(w));
        }
    }
    unitaries.push(complexify(&transition(&target, &source, t)?));
    QueryAlgorithm::new(dim_in, dim_work, unitaries)
}

fn normalised(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    out
}

/// Probability of answering `f(x)` on every input `x`.
pub fn success_profile(alg: &QueryAlgorithm, f: &BooleanFunction) -> Result<Vec<f64>> {
    if alg.arity() != f.arity() {
        return Err(Error::Shape(format!(
            "algorithm addresses {} bits but the function has {}",
            alg.arity(),
            f.arity()
        )));
    }
    simulate::check_unitary(alg)?;
    Ok((0..f.len())
        .map(|x| {
            let dist = simulate::run_unchecked(alg, &simulate::OracleSpec::from_index(x, f.arity()));
            dist.probability(f.eval(x))
        })
        .collect())
}

/// Gram matrix `⟨s_x|s_y⟩` of a family of complex state vectors.
pub fn state_gram(states: &[nalgebra::DVector<Complex64>]) -> DMatrix<Complex64> {
    DMatrix::from_fn(states.len(), states.len(), |x, y| states[x].dotc(&states[y]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{build_instance, fixture, solve_min_error};

    #[test]
    fn fixture_algorithms_are_exact() {
        for id in [7u64, 67] {
            let sol = fixture(id).unwrap();
            let f = sol.function().unwrap();
            let alg = extract_algorithm(&sol, false).unwrap();
            assert_eq!(alg.t(), 2);
            assert_eq!(alg.dims(), [4, 8, 2]);
            assert!(alg.unitarity_error() < 1e-9);
            let profile = success_profile(&alg, &f).unwrap();
            assert!(profile.iter().all(|&p| p > 1.0 - 1e-9), "{id}: {profile:?}");
        }
    }

    #[test]
    fn rank_reduction_shrinks_workspace() {
        let sol = fixture(7).unwrap();
        let f = sol.function().unwrap();
        let alg = extract_algorithm(&sol, true).unwrap();
        assert_eq!(alg.dims()[1], sol.max_rank(RANK_TOL));
        assert!(alg.dims()[1] < 8);
        let full = success_profile(&extract_algorithm(&sol, false).unwrap(), &f).unwrap();
        let reduced = success_profile(&alg, &f).unwrap();
        for (a, b) in full.iter().zip(&reduced) {
            assert!(b >= &(a - 1e-8));
        }
    }

    #[test]
    fn parity_from_solver() {
        let f = BooleanFunction::parity(2);
        let sol = solve_min_error(&build_instance(&f, 1).unwrap(), &SolverConfig::default()).unwrap();
        let alg = extract_algorithm(&sol, false).unwrap();
        let profile = success_profile(&alg, &f).unwrap();
        assert!(profile.iter().all(|&p| p > 1.0 - 1e-6), "{profile:?}");
    }

    #[test]
    fn inexact_solution_profile_tracks_gamma() {
        let f = BooleanFunction::and(2);
        let sol = solve_min_error(&build_instance(&f, 1).unwrap(), &SolverConfig::default()).unwrap();
        let alg = extract_algorithm(&sol, false).unwrap();
        let profile = success_profile(&alg, &f).unwrap();
        for (x, p) in profile.iter().enumerate() {
            assert!(*p >= 1.0 - sol.eps - 1e-6, "x={x}: {p}");
            assert!((p - sol.gamma(f.eval(x))[(x, x)]).abs() < 1e-6);
        }
    }

    #[test]
    fn gram_mismatch_names_step() {
        let mut sol = fixture(7).unwrap();
        sol.m[1][1] *= 1.5;
        match extract_algorithm(&sol, false) {
            Err(Error::Extraction { step, .. }) => assert_eq!(step, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn profile_arity_mismatch() {
        let alg = extract_algorithm(&fixture(7).unwrap(), true).unwrap();
        assert!(matches!(success_profile(&alg, &BooleanFunction::and(2)), Err(Error::Shape(_))));
    }

    #[test]
    fn json_round_trip() {
        let alg = extract_algorithm(&fixture(67).unwrap(), true).unwrap();
        let back = QueryAlgorithm::from_json(&alg.to_json()).unwrap();
        assert_eq!(back, alg);
        assert!(QueryAlgorithm::from_json(r#"{"t":1,"dims":[2,1,2],"unitaries":[]}"#).is_err());
    }
}
