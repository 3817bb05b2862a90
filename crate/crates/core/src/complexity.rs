//! Classical complexity measures: decision-tree depth, real and 𝔽₂ degree,
//! and the five-bit candidate pipeline used to rule out `Q_E(f) < D(f)/2`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::boolfn::{weight, BooleanFunction};
use crate::error::{Error, Result};

/// Largest arity accepted by [`decision_tree_depth`].
pub const MAX_DECISION_TREE_ARITY: usize = 8;

/// Classical measures for one function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub function: BooleanFunction,
    pub arity: usize,
    pub decision_tree_depth: usize,
    pub deg_real: usize,
    pub deg_f2: usize,
    /// Depth lower bound for parity decision trees (equal to the 𝔽₂ degree).
    pub parity_tree_lb: usize,
}

impl ComplexityReport {
    pub const CSV_HEADER: &'static str = "id,n,D,deg_real,deg_f2";

    pub fn compute(f: &BooleanFunction) -> Result<Self> {
        let deg_f2 = f2_degree(f);
        Ok(ComplexityReport {
            function: f.clone(),
            arity: f.arity(),
            decision_tree_depth: decision_tree_depth(f)?,
            deg_real: real_degree(f),
            deg_f2,
            parity_tree_lb: deg_f2,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.function.function_id(),
            self.arity,
            self.decision_tree_depth,
            self.deg_real,
            self.deg_f2
        )
    }
}

/// Coefficients of the unique multilinear real polynomial, indexed by monomial
/// (an input index whose set bits are the monomial's variables).
pub fn real_coefficients(f: &BooleanFunction) -> Vec<i64> {
    let n = f.arity();
    let mut a: Vec<i64> = f.table().map(|b| b as i64).collect();
    for bit in 0..n {
        let step = 1usize << bit;
        for x in 0..a.len() {
            if x & step != 0 {
                a[x] -= a[x ^ step];
            }
        }
    }
    a
}

/// Algebraic normal form coefficients over 𝔽₂.
pub fn anf_coefficients(f: &BooleanFunction) -> Vec<bool> {
    let n = f.arity();
    let mut a: Vec<bool> = f.table().collect();
    for bit in 0..n {
        let step = 1usize << bit;
        for x in 0..a.len() {
            if x & step != 0 {
                a[x] ^= a[x ^ step];
            }
        }
    }
    a
}

/// Degree of the multilinear real polynomial agreeing with `f` on `{0,1}^n`.
pub fn real_degree(f: &BooleanFunction) -> usize {
    real_coefficients(f)
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(s, _)| weight(s))
        .max()
        .unwrap_or(0)
}

/// Degree of `f` as a polynomial over 𝔽₂.
pub fn f2_degree(f: &BooleanFunction) -> usize {
    anf_coefficients(f)
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(s, _)| weight(s))
        .max()
        .unwrap_or(0)
}

/// Restricts a packed table of arity `n ≤ 6`.
fn restrict_word(table: u64, n: usize, var: usize, value: bool) -> u64 {
    let low_bits = n - var;
    let low_mask = (1usize << low_bits) - 1;
    let mut out = 0u64;
    for y in 0..(1usize << (n - 1)) {
        let x = ((((y >> low_bits) << 1) | value as usize) << low_bits) | (y & low_mask);
        out |= ((table >> x) & 1) << y;
    }
    out
}

fn is_constant_word(table: u64, n: usize) -> bool {
    let len = 1usize << n;
    let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
    table & mask == 0 || table & mask == mask
}

/// Memoised exact decision-tree depth.
#[derive(Default)]
pub struct DecisionTreeSolver {
    small: HashMap<(u8, u64), u8>,
    large: HashMap<BooleanFunction, u8>,
}

impl DecisionTreeSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn depth(&mut self, f: &BooleanFunction) -> Result<usize> {
        if f.arity() > MAX_DECISION_TREE_ARITY {
            return Err(Error::Capacity(format!(
                "decision-tree recursion supports n ≤ {MAX_DECISION_TREE_ARITY}, got {}",
                f.arity()
            )));
        }
        Ok(self.depth_any(f) as usize)
    }

    fn depth_any(&mut self, f: &BooleanFunction) -> u8 {
        let n = f.arity();
        if n <= 6 {
            return self.depth_word(f.words()[0], n);
        }
        if f.is_constant() {
            return 0;
        }
        if let Some(&d) = self.large.get(f) {
            return d;
        }
        let mut best = u8::MAX;
        for var in 1..=n {
            let lo = f.restrict(var, false).expect("variable in range");
            let hi = f.restrict(var, true).expect("variable in range");
            let d = 1 + self.depth_any(&lo).max(self.depth_any(&hi));
            best = best.min(d);
        }
        self.large.insert(f.clone(), best);
        best
    }

    /// Depth of a packed table with `n ≤ 6`.
    pub fn depth_word(&mut self, table: u64, n: usize) -> u8 {
        if is_constant_word(table, n) {
            return 0;
        }
        if let Some(&d) = self.small.get(&(n as u8, table)) {
            return d;
        }
        let mut best = u8::MAX;
        for var in 1..=n {
            let lo = restrict_word(table, n, var, false);
            let hi = restrict_word(table, n, var, true);
            let d_lo = self.depth_word(lo, n - 1);
            if 1 + d_lo >= best {
                continue;
            }
            let d = 1 + d_lo.max(self.depth_word(hi, n - 1));
            best = best.min(d);
        }
        self.small.insert((n as u8, table), best);
        best
    }
}

/// Exact decision-tree complexity `D(f)` for `n ≤ 8`.
pub fn decision_tree_depth(f: &BooleanFunction) -> Result<usize> {
    DecisionTreeSolver::new().depth(f)
}

/// NPN classes on at most four bits with `Q_E ≤ 2`, as `(arity, ID)` pairs:
/// the constant, `x_1`, AND and XOR on two bits, the nine three-bit classes
/// computable with two queries, and the twelve four-bit classes whose
/// two-query success probability is reported as 1.
pub const TWO_QUERY_CLASSES: [(usize, u64); 25] = [
    (0, 0),
    (1, 1),
    (2, 1),
    (2, 6),
    (3, 6),
    (3, 7),
    (3, 22),
    (3, 23),
    (3, 30),
    (3, 53),
    (3, 67),
    (3, 105),
    (3, 126),
    (4, 1632),
    (4, 1647),
    (4, 1695),
    (4, 1782),
    (4, 1785),
    (4, 2016),
    (4, 5736),
    (4, 6030),
    (4, 6120),
    (4, 7128),
    (4, 7140),
    (4, 27030),
];

/// The class list of [`TWO_QUERY_CLASSES`] as functions.
pub fn two_query_class_representatives() -> Vec<BooleanFunction> {
    TWO_QUERY_CLASSES
        .iter()
        .map(|&(n, id)| BooleanFunction::from_id_u64(n, id).expect("table IDs are valid"))
        .collect()
}

/// Five-bit functions `f = (1 - x_1) f_0 + x_1 f_1` with `f_0`, `f_1` drawn from
/// the NPN orbits (as four-bit functions) of `classes`, keeping only those with
/// real degree at most 4 and `D(f) = 5`.
///
/// `None` signals a missing class list; an empty list yields no candidates.
pub fn five_bit_candidates(classes: Option<&[BooleanFunction]>) -> Result<Vec<BooleanFunction>> {
    let classes = classes.ok_or_else(|| {
        Error::Configuration("five-bit search needs the list of Q_E ≤ 2 classes".into())
    })?;

    let mut members: HashSet<u16> = HashSet::new();
    for class in classes {
        if class.arity() > 4 {
            return Err(Error::Parameter(format!(
                "class representative has arity {} > 4",
                class.arity()
            )));
        }
        let f4 = class.extend(4 - class.arity())?;
        for image in f4.npn_images() {
            members.insert(image.words()[0] as u16);
        }
    }
    let mut members: Vec<u16> = members.into_iter().collect();
    members.sort_unstable();

    // top Möbius coefficient of the join is top(f1) - top(f0)
    let top = |t: u16| -> i32 {
        (0..16usize)
            .map(|x| {
                let v = ((t >> x) & 1) as i32;
                if (4 - weight(x)) % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .sum()
    };
    let mut by_top: HashMap<i32, Vec<u16>> = HashMap::new();
    for &m in &members {
        by_top.entry(top(m)).or_default().push(m);
    }

    let mut depth4 = vec![0u8; 1 << 16];
    let mut solver = DecisionTreeSolver::new();
    for (t, d) in depth4.iter_mut().enumerate() {
        *d = solver.depth_word(t as u64, 4);
    }

    let mut out = Vec::new();
    for &f0 in &members {
        for &f1 in &by_top[&top(f0)] {
            let table = (f0 as u64) | ((f1 as u64) << 16);
            let shallow = (1..=5).any(|var| {
                let lo = restrict_word(table, 5, var, false) as usize;
                let hi = restrict_word(table, 5, var, true) as usize;
                depth4[lo].max(depth4[hi]) <= 3
            });
            if !shallow {
                out.push(
                    BooleanFunction::from_fn(5, |x| (table >> x) & 1 == 1)
                        .expect("arity 5 is supported"),
                );
            }
        }
    }
    out.sort_by(|a, b| a.cmp_id(b));
    out.dedup();
    Ok(out)
}
