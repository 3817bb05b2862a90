//! Nonadaptive exact query complexity via the invariance subspace `S_f`.
//!
//! Bit strings are truth-table indices: variable `i` (1-based) is bit `n - i`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::boolfn::{weight, BooleanFunction};
use crate::error::{Error, Result};
use crate::extract::{QueryAlgorithm, DIM_OUT};
use crate::linalg::CMatrix;

/// Largest arity for which subspaces are enumerated explicitly.
pub const MAX_SUBSPACE_ARITY: usize = 16;

/// A linear subspace of 𝔽₂ⁿ held as a reduced echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    n: usize,
    basis: Vec<usize>,
}

impl Subspace {
    /// The span of `generators`.
    pub fn span(n: usize, generators: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n > MAX_SUBSPACE_ARITY {
            return Err(Error::Capacity(format!("subspaces of 𝔽₂^{n} are not enumerable")));
        }
        let full = (1usize << n) - 1;
        let mut basis: Vec<usize> = Vec::new();
        for g in generators {
            if g & !full != 0 {
                return Err(Error::Range(format!("vector {g:#b} has more than {n} bits")));
            }
            let mut v = g;
            for &b in &basis {
                v = v.min(v ^ b);
            }
            if v != 0 {
                for b in basis.iter_mut() {
                    *b = (*b).min(*b ^ v);
                }
                basis.push(v);
                basis.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        Ok(Self { n, basis })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::span(n, [])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.basis.iter().fold(v, |acc, &b| acc.min(acc ^ b)) == 0
    }

    /// All `2^dim` members in increasing order.
    pub fn members(&self) -> Vec<usize> {
        let mut out = vec![0usize];
        for &b in &self.basis {
            let extra: Vec<usize> = out.iter().map(|&m| m ^ b).collect();
            out.extend(extra);
        }
        out.sort_unstable();
        out
    }

    /// `{y : y·z = 0 for all z in the subspace}`.
    pub fn dual(&self) -> Self {
        let members = (0..1usize << self.n).filter(|&y| self.basis.iter().all(|&b| weight(y & b) % 2 == 0));
        Self::span(self.n, members).expect("arity already validated")
    }

    /// Hamming distance from `x` to the nearest member.
    pub fn distance(&self, x: usize) -> usize {
        self.members().into_iter().map(|y| weight(x ^ y)).min().unwrap_or(0)
    }
}

/// `S_f = {z : f(x) = f(x ⊕ z) for all x}`.
pub fn invariance_subspace(f: &BooleanFunction) -> Result<Subspace> {
    let n = f.arity();
    let members = (0..f.len()).filter(|&z| (0..f.len()).all(|x| f.eval(x) == f.eval(x ^ z)));
    let s = Subspace::span(n, members)?;
    debug_assert!(s.members().into_iter().all(|z| (0..f.len()).all(|x| f.eval(x) == f.eval(x ^ z))));
    Ok(s)
}

/// Covering radius `min_x max_{y ∈ C} d(x, y)` with the smallest minimising `x`.
pub fn radius(code: &[usize], n: usize) -> Result<(usize, usize)> {
    if code.is_empty() {
        return Err(Error::Parameter("the code must be nonempty".into()));
    }
    if n > MAX_SUBSPACE_ARITY {
        return Err(Error::Capacity(format!("radius over {n} bits is too expensive")));
    }
    let mut best = (usize::MAX, 0usize);
    for x in 0..1usize << n {
        let r = code.iter().map(|&y| weight(x ^ y)).max().unwrap_or(0);
        if r < best.0 {
            best = (r, x);
        }
    }
    Ok(best)
}

/// Nonadaptive exact quantum query complexity with its radius witness.
pub fn q_na_witness(f: &BooleanFunction) -> Result<(usize, usize)> {
    let dual = invariance_subspace(f)?.dual();
    radius(&dual.members(), f.arity())
}

pub fn q_na(f: &BooleanFunction) -> Result<usize> {
    Ok(q_na_witness(f)?.0)
}

/// Whether an exact nonadaptive algorithm exists with `t` queries.
pub fn starred(f: &BooleanFunction, t: usize) -> Result<bool> {
    Ok(q_na(f)? <= t)
}

/// Normalised Walsh–Hadamard spectrum `2^{-n} Σ_x (-1)^{f(x) + b·x}` indexed by `b`.
pub fn walsh_hadamard(f: &BooleanFunction) -> Vec<f64> {
    let mut v: Vec<i64> = f.table().map(|b| if b { -1 } else { 1 }).collect();
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
    let scale = f.len() as f64;
    v.into_iter().map(|c| c as f64 / scale).collect()
}

/// An input `x` with `f(x) ≠ f(x ⊕ e_var)`: a deterministic nonadaptive
/// algorithm that skips `var` errs on one of the pair.
pub fn dependence_witness(f: &BooleanFunction, var: usize) -> Option<usize> {
    if var == 0 || var > f.arity() {
        return None;
    }
    let bit = 1usize << (f.arity() - var);
    (0..f.len()).find(|&x| f.eval(x) != f.eval(x ^ bit))
}

/// Nonadaptive deterministic query complexity: the number of relevant variables.
pub fn classical_nonadaptive_complexity(f: &BooleanFunction) -> usize {
    (1..=f.arity()).filter(|&i| dependence_witness(f, i).is_some()).count()
}

/// Exact nonadaptive algorithm: query the coset `w + S_f^⊥` in superposition,
/// apply Hadamards to the label register and output `f` of the measured string.
///
/// Registers are `[n + 1, 2^n, 2]`; the label `s` sits in the work register
/// and query `j` addresses the `j`-th variable in the support of `s`.
pub fn nonadaptive_algorithm(f: &BooleanFunction) -> Result<QueryAlgorithm> {
    let n = f.arity();
    let (k, w) = q_na_witness(f)?;
    let dual = invariance_subspace(f)?.dual();
    let coset: Vec<usize> = dual.members().into_iter().map(|u| u ^ w).collect();
    let dim_in = n + 1;
    let dim_work = 1usize << n;
    let dim = dim_in * dim_work * DIM_OUT;
    let idx = |i: usize, s: usize, o: usize| (i * dim_work + s) * DIM_OUT + o;

    // slot(s, j) for j = 1..=k, and 0 once the queries are spent
    let support = |s: usize| -> Vec<usize> { (1..=n).filter(|&i| s >> (n - i) & 1 == 1).collect() };
    let supports: Vec<Vec<usize>> = coset.iter().map(|&s| support(s)).collect();
    let slot = |c: usize, j: usize| -> usize {
        if j >= 1 && j <= k {
            supports[c].get(j - 1).copied().unwrap_or(0)
        } else {
            0
        }
    };

    let amp = 1.0 / (coset.len() as f64).sqrt();
    let mut target = vec![0.0; dim];
    for (c, &s) in coset.iter().enumerate() {
        target[idx(slot(c, 1), s, 0)] = amp;
    }
    let prepare = householder(&target);

    let moves = |from: usize| -> CMatrix {
        let mut perm: Vec<usize> = (0..dim).collect();
        for (c, &s) in coset.iter().enumerate() {
            let (a, b) = (slot(c, from), slot(c, from + 1));
            if a != b {
                for o in 0..DIM_OUT {
                    perm.swap(idx(a, s, o), idx(b, s, o));
                }
            }
        }
        permutation(&perm)
    };

    let h = (dim_work as f64).sqrt().recip();
    let mut finish = CMatrix::zeros(dim, dim);
    for i in 0..dim_in {
        for y in 0..dim_work {
            for s in 0..dim_work {
                let sign = if weight(y & s) % 2 == 0 { h } else { -h };
                for o in 0..DIM_OUT {
                    let out = o ^ usize::from(f.eval(y));
                    finish[(idx(i, y, out), idx(i, s, o))] = Complex64::new(sign, 0.0);
                }
            }
        }
    }

    let mut unitaries = Vec::with_capacity(k + 1);
    if k == 0 {
        unitaries.push(&finish * &prepare);
    } else {
        unitaries.push(prepare);
        for j in 1..k {
            unitaries.push(moves(j));
        }
        unitaries.push(&finish * moves(k));
    }
    QueryAlgorithm::new(dim_in, dim_work, unitaries)
}

/// Reflection sending `e_0` to the unit vector `v`.
fn householder(v: &[f64]) -> CMatrix {
    let d = v.len();
    let mut u: Vec<f64> = v.iter().map(|x| -x).collect();
    u[0] += 1.0;
    let norm2: f64 = u.iter().map(|x| x * x).sum();
    let mut m = CMatrix::identity(d, d);
    if norm2 < 1e-24 {
        return m;
    }
    for r in 0..d {
        if u[r] == 0.0 {
            continue;
        }
        for c in 0..d {
            m[(r, c)] -= Complex64::new(2.0 * u[r] * u[c] / norm2, 0.0);
        }
    }
    m
}

/// Matrix sending basis state `k` to `perm[k]`.
fn permutation(perm: &[usize]) -> CMatrix {
    let d = perm.len();
    let mut m = CMatrix::zeros(d, d);
    for (k, &p) in perm.iter().enumerate() {
        m[(p, k)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// The four classes of symmetric functions by nonadaptive complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricClass {
    Constant,
    Parity,
    Palindromic,
    Other,
}

impl SymmetricClass {
    /// Nonadaptive exact complexity of a class member on `n` bits.
    pub fn q_na(self, n: usize) -> usize {
        match self {
            SymmetricClass::Constant => 0,
            SymmetricClass::Parity => n.div_ceil(2),
            SymmetricClass::Palindromic => n - 1,
            SymmetricClass::Other => n,
        }
    }
}

impl fmt::Display for SymmetricClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetricClass::Constant => "constant",
            SymmetricClass::Parity => "parity",
            SymmetricClass::Palindromic => "palindromic",
            SymmetricClass::Other => "other",
        })
    }
}

/// Class of a symmetric function and its nonadaptive complexity.
pub fn classify_symmetric(f: &BooleanFunction) -> Result<(SymmetricClass, usize)> {
    let profile = f
        .symmetric_profile()
        .ok_or_else(|| Error::Classification("function is not symmetric".into()))?;
    let n = f.arity();
    let class = if profile.iter().all(|&c| c == profile[0]) {
        SymmetricClass::Constant
    } else if profile.windows(2).all(|w| w[0] != w[1]) {
        SymmetricClass::Parity
    } else if (0..=n).all(|k| profile[k] == profile[n - k]) {
        SymmetricClass::Palindromic
    } else {
        SymmetricClass::Other
    };
    Ok((class, class.q_na(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::FunctionFamily;
    use crate::simulate::min_success;

    #[test]
    fn parity_subspace_is_even_weight() {
        for n in 1..=5 {
            let s = invariance_subspace(&BooleanFunction::parity(n)).unwrap();
            assert_eq!(s.dim(), n - 1);
            assert!(s.members().iter().all(|&z| weight(z) % 2 == 0));
        }
    }

    #[test]
    fn and_subspace_is_trivial() {
        assert!(invariance_subspace(&BooleanFunction::and(4)).unwrap().is_trivial());
    }

    #[test]
    fn exact_two_subspace() {
        let f = BooleanFunction::from_family(&FunctionFamily::Exact(2), 4).unwrap();
        assert_eq!(invariance_subspace(&f).unwrap().members(), vec![0b0000, 0b1111]);
    }

    #[test]
    fn subspace_algebra() {
        let s = Subspace::span(4, [0b1100, 0b0110, 0b1010]).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.members(), vec![0, 0b0110, 0b1010, 0b1100]);
        let d = s.dual();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.dual(), s);
        assert!(Subspace::span(2, [0b100]).is_err());
    }

    #[test]
    fn radius_examples() {
        assert_eq!(radius(&[0], 3).unwrap(), (0, 0));
        assert_eq!(radius(&[0, 0b11111], 5).unwrap().0, 3);
        let even: Vec<usize> = (0..16).filter(|&y| weight(y) % 2 == 0).collect();
        assert_eq!(radius(&even, 4).unwrap().0, 3);
        assert!(matches!(radius(&[], 2), Err(Error::Parameter(_))));
    }

    #[test]
    fn q_na_examples() {
        assert_eq!(q_na(&BooleanFunction::and(4)).unwrap(), 4);
        for n in 1..=6 {
            assert_eq!(q_na(&BooleanFunction::parity(n)).unwrap(), n.div_ceil(2));
        }
        let nae = BooleanFunction::from_family(&FunctionFamily::NotAllEqual, 3).unwrap();
        assert_eq!(q_na(&nae).unwrap(), 2);
        assert!(starred(&nae, 2).unwrap());
        assert!(!starred(&nae, 1).unwrap());
    }

    #[test]
    fn classification_examples() {
        let maj = BooleanFunction::from_family(&FunctionFamily::Majority, 3).unwrap();
        assert_eq!(classify_symmetric(&maj).unwrap(), (SymmetricClass::Other, 3));
        let nae = BooleanFunction::from_family(&FunctionFamily::NotAllEqual, 3).unwrap();
        assert_eq!(classify_symmetric(&nae).unwrap(), (SymmetricClass::Palindromic, 2));
        assert_eq!(
            classify_symmetric(&BooleanFunction::parity(6)).unwrap(),
            (SymmetricClass::Parity, 3)
        );
        let sel = BooleanFunction::from_id_u64(3, 53).unwrap();
        assert!(matches!(classify_symmetric(&sel), Err(Error::Classification(_))));
    }

    #[test]
    fn walsh_of_parity_is_a_point_mass() {
        let spec = walsh_hadamard(&BooleanFunction::parity(3));
        assert_eq!(spec[7], 1.0);
        assert!(spec[..7].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn algorithms_are_exact() {
        for f in [
            BooleanFunction::parity(4),
            BooleanFunction::and(3),
            BooleanFunction::constant(3, true).unwrap(),
            BooleanFunction::from_family(&FunctionFamily::NotAllEqual, 4).unwrap(),
        ] {
            let alg = nonadaptive_algorithm(&f).unwrap();
            assert_eq!(alg.t(), q_na(&f).unwrap());
            assert!(min_success(&alg, &f).unwrap() > 1.0 - 1e-10);
        }
        assert_eq!(nonadaptive_algorithm(&BooleanFunction::parity(4)).unwrap().t(), 2);
    }

    #[test]
    fn classical_nonadaptive_counts_relevant_variables() {
        let f = BooleanFunction::from_fn(3, |x| x & 0b100 != 0).unwrap();
        assert_eq!(classical_nonadaptive_complexity(&f), 1);
        assert_eq!(dependence_witness(&f, 2), None);
        assert_eq!(dependence_witness(&f, 1), Some(0));
    }
}
