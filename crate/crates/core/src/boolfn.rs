//! Boolean functions on up to 16 input bits.
//!
//! Inputs are indexed MSB-first: bit `x_1` is the most significant bit of the
//! input index, so `idx(x) = Σ x_i 2^(n-i)`. The function ID is the integer
//! whose binary expansion, most significant bit first, lists `f(0), f(1), …,
//! f(2^n - 1)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported arity.
pub const MAX_ARITY: usize = 16;

/// A total boolean function stored as a packed truth table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    arity: usize,
    // bit `idx` of the table is f(idx); unused high bits are always zero
    words: Vec<u64>,
}

/// Value of variable `var` (1-based, `x_1` most significant) in input `x`.
#[inline]
pub fn input_bit(x: usize, var: usize, n: usize) -> bool {
    (x >> (n - var)) & 1 == 1
}

/// Hamming weight of an input index.
#[inline]
pub fn weight(x: usize) -> usize {
    x.count_ones() as usize
}

fn words_for(n: usize) -> usize {
    ((1usize << n) + 63) / 64
}

fn check_arity(n: usize) -> Result<()> {
    if n > MAX_ARITY {
        return Err(Error::Capacity(format!(
            "arity {n} exceeds the supported limit of {MAX_ARITY}"
        )));
    }
    Ok(())
}

impl BooleanFunction {
    /// Builds a function by evaluating `f` on every input index.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Result<Self> {
        check_arity(n)?;
        let mut words = vec![0u64; words_for(n)];
        for x in 0..(1usize << n) {
            if f(x) {
                words[x / 64] |= 1 << (x % 64);
            }
        }
        Ok(BooleanFunction { arity: n, words })
    }

    pub fn constant(n: usize, value: bool) -> Result<Self> {
        Self::from_fn(n, |_| value)
    }

    /// Constructs a function from its ID.
    pub fn from_id(n: usize, id: &BigUint) -> Result<Self> {
        check_arity(n)?;
        let len = 1usize << n;
        if id.bits() > len as u64 {
            return Err(Error::Range(format!(
                "ID {id} does not fit a truth table on {n} bits"
            )));
        }
        Self::from_fn(n, |x| id.bit((len - 1 - x) as u64))
    }

    /// Constructs a function from an ID that fits in a machine word (n ≤ 6).
    pub fn from_id_u64(n: usize, id: u64) -> Result<Self> {
        if n > 6 {
            return Self::from_id(n, &BigUint::from(id));
        }
        let len = 1usize << n;
        if len < 64 && id >> len != 0 {
            return Err(Error::Range(format!(
                "ID {id} does not fit a truth table on {n} bits"
            )));
        }
        let word = id.reverse_bits() >> (64 - len);
        Ok(BooleanFunction {
            arity: n,
            words: vec![word],
        })
    }

    /// Parses an MSB-first hexadecimal truth table (the ID in hex).
    pub fn from_hex(n: usize, hex: &str) -> Result<Self> {
        let id = BigUint::parse_bytes(hex.trim_start_matches("0x").as_bytes(), 16)
            .ok_or_else(|| Error::Parameter(format!("invalid hex truth table {hex:?}")))?;
        Self::from_id(n, &id)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of inputs, `2^n`.
    pub fn len(&self) -> usize {
        1 << self.arity
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn eval(&self, x: usize) -> bool {
        (self.words[x / 64] >> (x % 64)) & 1 == 1
    }

    /// Truth table as bits indexed by input.
    pub fn table(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |x| self.eval(x))
    }

    /// Raw packed words (bit `idx` holds `f(idx)`).
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn function_id(&self) -> BigUint {
        if let Some(id) = self.id_u64() {
            return BigUint::from(id);
        }
        let len = self.len();
        let mut id = BigUint::zero();
        for x in 0..len {
            if self.eval(x) {
                id.set_bit((len - 1 - x) as u64, true);
            }
        }
        id
    }

    /// The ID as a machine word, available for n ≤ 6.
    pub fn id_u64(&self) -> Option<u64> {
        if self.arity > 6 {
            return None;
        }
        Some(self.words[0].reverse_bits() >> (64 - self.len()))
    }

    /// ID rendered as an MSB-first hex truth table.
    pub fn to_hex(&self) -> String {
        let digits = self.len().div_ceil(4);
        format!("{:0>width$}", self.function_id().to_str_radix(16), width = digits)
    }

    pub fn is_constant(&self) -> bool {
        let first = self.eval(0);
        self.table().all(|b| b == first)
    }

    /// Number of inputs with f(x) = 1.
    pub fn ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn negated(&self) -> Self {
        let len = self.len();
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if len < 64 {
            words[0] &= (1u64 << len) - 1;
        }
        BooleanFunction {
            arity: self.arity,
            words,
        }
    }

    /// True if some pair `x`, `x + e_var` is mapped to different values.
    pub fn depends_on(&self, var: usize) -> bool {
        assert!(var >= 1 && var <= self.arity, "variable out of range");
        let mask = 1usize << (self.arity - var);
        (0..self.len())
            .filter(|x| x & mask == 0)
            .any(|x| self.eval(x) != self.eval(x | mask))
    }

    pub fn depends_on_all(&self) -> bool {
        (1..=self.arity).all(|i| self.depends_on(i))
    }

    /// Number of variables the function actually depends on.
    pub fn essential_arity(&self) -> usize {
        (1..=self.arity).filter(|&i| self.depends_on(i)).count()
    }

    /// `Some((c_0, …, c_n))` when `f(x)` depends only on `|x|`.
    pub fn symmetric_profile(&self) -> Option<Vec<bool>> {
        let mut profile: Vec<Option<bool>> = vec![None; self.arity + 1];
        for x in 0..self.len() {
            let v = self.eval(x);
            match profile[weight(x)] {
                None => profile[weight(x)] = Some(v),
                Some(p) if p != v => return None,
                _ => {}
            }
        }
        Some(profile.into_iter().map(|p| p.unwrap_or(false)).collect())
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric_profile().is_some()
    }

    /// Fixes variable `var` (1-based) to `value`, yielding a function on n−1 bits.
    pub fn restrict(&self, var: usize, value: bool) -> Result<Self> {
        if var == 0 || var > self.arity {
            return Err(Error::Range(format!(
                "variable {var} outside 1..={}",
                self.arity
            )));
        }
        let n = self.arity;
        let low_bits = n - var;
        let low_mask = (1usize << low_bits) - 1;
        Self::from_fn(n - 1, |y| {
            let high = y >> low_bits;
            let low = y & low_mask;
            let x = (((high << 1) | value as usize) << low_bits) | low;
            self.eval(x)
        })
    }

    /// Applies an NPN transform: `g(x) = out_neg ⊕ f(y)` where
    /// `y_{perm[i]} = x_{i} ⊕ neg_i` (0-based variable positions, MSB-first).
    pub fn transform(&self, perm: &[usize], neg_mask: usize, out_neg: bool) -> Self {
        let n = self.arity;
        debug_assert_eq!(perm.len(), n);
        let map = permutation_map(perm, n);
        BooleanFunction::from_fn(n, |x| self.eval(map[x ^ neg_mask]) ^ out_neg)
            .expect("arity already validated")
    }

    /// Composes `self` (outer, n bits) with `inner` (k bits) on consecutive blocks.
    pub fn compose_blocks(&self, inner: &BooleanFunction) -> Result<Self> {
        let n = self.arity;
        let k = inner.arity;
        let total = n * k;
        if total > MAX_ARITY {
            return Err(Error::Capacity(format!(
                "composition arity {total} exceeds {MAX_ARITY}"
            )));
        }
        let block_mask = (1usize << k) - 1;
        Self::from_fn(total, |x| {
            let mut outer = 0usize;
            for b in 0..n {
                let block = (x >> ((n - 1 - b) * k)) & block_mask;
                outer = (outer << 1) | inner.eval(block) as usize;
            }
            self.eval(outer)
        })
    }

    /// Extends the function with `extra` dummy variables appended after `x_n`.
    pub fn extend(&self, extra: usize) -> Result<Self> {
        Self::from_fn(self.arity + extra, |x| self.eval(x >> extra))
    }

    /// Concatenates truth tables: `f(x) = (1 - x_1) f0(x') + x_1 f1(x')`.
    pub fn shannon_join(f0: &BooleanFunction, f1: &BooleanFunction) -> Result<Self> {
        if f0.arity != f1.arity {
            return Err(Error::Parameter("cofactors must share an arity".into()));
        }
        let half = f0.len();
        Self::from_fn(f0.arity + 1, |x| {
            if x < half {
                f0.eval(x)
            } else {
                f1.eval(x - half)
            }
        })
    }

    pub fn from_family(family: &FunctionFamily, n: usize) -> Result<Self> {
        check_arity(n)?;
        match family {
            FunctionFamily::Parity => Self::from_fn(n, |x| weight(x) % 2 == 1),
            FunctionFamily::Majority => Self::from_fn(n, |x| 2 * weight(x) >= n),
            FunctionFamily::Exact(k) => {
                if *k > n {
                    return Err(Error::Parameter(format!("EXACT_{k} needs k ≤ n = {n}")));
                }
                Self::from_fn(n, |x| weight(x) == *k)
            }
            FunctionFamily::NotAllEqual => {
                Self::from_fn(n, |x| weight(x) != 0 && weight(x) != n)
            }
            FunctionFamily::Threshold(k) => {
                if *k > n + 1 {
                    return Err(Error::Parameter(format!("Th_{k} needs k ≤ n + 1")));
                }
                Self::from_fn(n, |x| weight(x) >= *k)
            }
            FunctionFamily::Select => {
                if n != 3 {
                    return Err(Error::Parameter("SEL is defined on 3 bits".into()));
                }
                Self::from_fn(3, |x| {
                    if input_bit(x, 1, 3) {
                        input_bit(x, 3, 3)
                    } else {
                        input_bit(x, 2, 3)
                    }
                })
            }
            FunctionFamily::Symmetric(coeffs) => {
                if coeffs.len() != n + 1 {
                    return Err(Error::Parameter(format!(
                        "SYM needs {} coefficients, got {}",
                        n + 1,
                        coeffs.len()
                    )));
                }
                Self::from_fn(n, |x| coeffs[weight(x)])
            }
        }
    }

    /// AND on n bits.
    pub fn and(n: usize) -> Self {
        Self::from_family(&FunctionFamily::Threshold(n), n).expect("valid arity")
    }

    /// OR on n bits.
    pub fn or(n: usize) -> Self {
        Self::from_family(&FunctionFamily::Threshold(1), n).expect("valid arity")
    }

    pub fn parity(n: usize) -> Self {
        Self::from_family(&FunctionFamily::Parity, n).expect("valid arity")
    }

    /// Compares two functions by ID without materialising big integers.
    pub fn cmp_id(&self, other: &Self) -> std::cmp::Ordering {
        debug_assert_eq!(self.arity, other.arity);
        // f(0) is the most significant ID bit, so the first differing input decides
        for (a, b) in self.words.iter().zip(&other.words) {
            if a != b {
                let diff = a ^ b;
                let first = diff.trailing_zeros();
                return if (a >> first) & 1 == 1 {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Less
                };
            }
        }
        std::cmp::Ordering::Equal
    }

    /// All NPN images of the function (with repetition).
    pub fn npn_images(&self) -> impl Iterator<Item = BooleanFunction> + '_ {
        let n = self.arity;
        permutations(n).into_iter().flat_map(move |perm| {
            let map = permutation_map(&perm, n);
            (0..(1usize << n)).flat_map(move |neg| {
                let base = BooleanFunction::from_fn(n, |x| self.eval(map[x ^ neg]))
                    .expect("arity already validated");
                let flipped = base.negated();
                [base, flipped]
            })
        })
    }

    /// Minimum-ID member of the NPN class, with its ID.
    pub fn npn_canonical(&self) -> (BooleanFunction, BigUint) {
        let best = self
            .npn_images()
            .min_by(|a, b| a.cmp_id(b))
            .expect("group is non-empty");
        let id = best.function_id();
        (best, id)
    }
}

/// `map[x]` is the input index obtained by moving bit position `i` of `x`
/// (0-based, MSB-first) to position `perm[i]`.
fn permutation_map(perm: &[usize], n: usize) -> Vec<usize> {
    (0..(1usize << n))
        .map(|x| {
            let mut y = 0usize;
            for (i, &p) in perm.iter().enumerate() {
                if (x >> (n - 1 - i)) & 1 == 1 {
                    y |= 1 << (n - 1 - p);
                }
            }
            y
        })
        .collect()
}

/// Largest arity for which [`npn_classes`] enumerates every truth table.
pub const MAX_NPN_SWEEP_ARITY: usize = 4;

/// Minimum-ID representatives of every NPN class on `n` bits, by increasing ID.
pub fn npn_classes(n: usize) -> Result<Vec<BooleanFunction>> {
    if n > MAX_NPN_SWEEP_ARITY {
        return Err(Error::Capacity(format!(
            "enumerating all functions on {n} bits is infeasible (limit {MAX_NPN_SWEEP_ARITY})"
        )));
    }
    let count = 1usize << (1usize << n);
    let mut seen = vec![false; count];
    let mut out = Vec::new();
    for id in 0..count {
        if seen[id] {
            continue;
        }
        let f = BooleanFunction::from_id_u64(n, id as u64)?;
        for g in f.npn_images() {
            seen[g.id_u64().expect("small arity") as usize] = true;
        }
        out.push(f);
    }
    Ok(out)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction(n={}, id={})", self.arity, self.function_id())
    }
}

impl fmt::Display for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.function_id())
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionRepr {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<String>,
}

impl Serialize for BooleanFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionRepr {
            n: self.arity,
            id: Some(self.function_id().to_string()),
            table: (self.arity > 6).then(|| self.to_hex()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BooleanFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FunctionRepr::deserialize(deserializer)?;
        let parsed = match (&repr.id, &repr.table) {
            (Some(id), _) => {
                let id = BigUint::from_str(id).map_err(D::Error::custom)?;
                BooleanFunction::from_id(repr.n, &id)
            }
            (None, Some(hex)) => BooleanFunction::from_hex(repr.n, hex),
            (None, None) => return Err(D::Error::custom("function needs `id` or `table`")),
        };
        parsed.map_err(D::Error::custom)
    }
}

/// Named families of (mostly symmetric) functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionFamily {
    Parity,
    Majority,
    Exact(usize),
    NotAllEqual,
    Threshold(usize),
    Select,
    /// `SYM(c_0, …, c_n)`: `f(x) = c_{|x|}`.
    Symmetric(Vec<bool>),
}

impl FromStr for FunctionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        let parse_k = |rest: &str| -> Result<usize> {
            rest.trim_start_matches('_')
                .parse()
                .map_err(|_| Error::Parameter(format!("missing parameter in {s:?}")))
        };
        if let Some(inner) = upper
            .strip_prefix("SYM(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let coeffs = inner
                .split(',')
                .map(|c| match c.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::Parameter(format!("bad SYM coefficient {other:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(FunctionFamily::Symmetric(coeffs));
        }
        match upper.as_str() {
            "PARITY" | "XOR" => Ok(FunctionFamily::Parity),
            "MAJ" | "MAJORITY" => Ok(FunctionFamily::Majority),
            "NAE" => Ok(FunctionFamily::NotAllEqual),
            "SEL" => Ok(FunctionFamily::Select),
            _ => {
                if let Some(rest) = upper.strip_prefix("EXACT") {
                    Ok(FunctionFamily::Exact(parse_k(rest)?))
                } else if let Some(rest) = upper.strip_prefix("TH") {
                    Ok(FunctionFamily::Threshold(parse_k(rest)?))
                } else {
                    Err(Error::Parameter(format!("unknown function family {s:?}")))
                }
            }
        }
    }
}

impl fmt::Display for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionFamily::Parity => write!(f, "PARITY"),
            FunctionFamily::Majority => write!(f, "MAJ"),
            FunctionFamily::Exact(k) => write!(f, "EXACT_{k}"),
            FunctionFamily::NotAllEqual => write!(f, "NAE"),
            FunctionFamily::Threshold(k) => write!(f, "Th_{k}"),
            FunctionFamily::Select => write!(f, "SEL"),
            FunctionFamily::Symmetric(c) => {
                let body: Vec<&str> = c.iter().map(|&b| if b { "1" } else { "0" }).collect();
                write!(f, "SYM({})", body.join(","))
            }
        }
    }
}

/// Formats a symmetric profile as `(c_0,…,c_n)`.
pub fn profile_string(profile: &[bool]) -> String {
    let body: Vec<&str> = profile.iter().map(|&b| if b { "1" } else { "0" }).collect();
    format!("({})", body.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(f: &BooleanFunction) -> u64 {
        f.id_u64().unwrap()
    }

    #[test]
    fn npn_class_counts() {
        let counts: Vec<usize> = (0..=4).map(|n| npn_classes(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 14, 222]);
        let full: Vec<u64> = npn_classes(3)
            .unwrap()
            .into_iter()
            .filter(|f| f.depends_on_all())
            .map(|f| f.id_u64().unwrap())
            .collect();
        assert_eq!(full.len(), 10);
        assert!(full.iter().all(|&id| BooleanFunction::from_id_u64(3, id).unwrap().npn_canonical().1 == id.into()));
        assert!(matches!(npn_classes(5), Err(Error::Capacity(_))));
    }

    #[test]
    fn ids_of_named_three_bit_functions() {
        assert_eq!(
            BooleanFunction::from_id_u64(3, 105).unwrap(),
            BooleanFunction::parity(3)
        );
        let maj = BooleanFunction::from_family(&FunctionFamily::Majority, 3).unwrap();
        assert_eq!(id(&maj), 23);
        let sel = BooleanFunction::from_family(&FunctionFamily::Select, 3).unwrap();
        assert_eq!(id(&sel), 53);
        let exact2 = BooleanFunction::from_family(&FunctionFamily::Exact(2), 3).unwrap();
        assert_eq!(id(&exact2), 22);
        let nae = BooleanFunction::from_family(&FunctionFamily::NotAllEqual, 3).unwrap();
        assert_eq!(id(&nae), 126);
        assert_eq!(id(&BooleanFunction::and(3)), 1);
    }

    #[test]
    fn exact2_on_four_bits_is_5736() {
        let f = BooleanFunction::from_family(&FunctionFamily::Exact(2), 4).unwrap();
        assert_eq!(id(&f), 5736);
    }

    #[test]
    fn threshold_zero_is_constant_one() {
        for n in 0..5 {
            let f = BooleanFunction::from_family(&FunctionFamily::Threshold(0), n).unwrap();
            assert!(f.table().all(|b| b));
        }
    }

    #[test]
    fn zero_id_is_constant_zero() {
        let f = BooleanFunction::from_id_u64(4, 0).unwrap();
        assert!(f.is_constant() && !f.eval(0));
    }

    #[test]
    fn out_of_range_id_is_rejected() {
        assert!(matches!(
            BooleanFunction::from_id_u64(2, 16),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            BooleanFunction::from_id(3, &BigUint::from(256u32)),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            BooleanFunction::from_id_u64(17, 0),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn bad_family_parameters() {
        assert!(BooleanFunction::from_family(&FunctionFamily::Select, 4).is_err());
        assert!(BooleanFunction::from_family(&FunctionFamily::Exact(5), 4).is_err());
        assert!(
            BooleanFunction::from_family(&FunctionFamily::Symmetric(vec![true, false]), 3)
                .is_err()
        );
    }

    #[test]
    fn id_round_trip_exhaustive_small() {
        for n in 0..=4usize {
            for id in 0..(1u64 << (1 << n)) {
                let f = BooleanFunction::from_id_u64(n, id).unwrap();
                assert_eq!(f.id_u64(), Some(id));
                assert_eq!(f.function_id(), BigUint::from(id));
                let g = BooleanFunction::from_id(n, &BigUint::from(id)).unwrap();
                assert_eq!(f, g);
            }
        }
    }

    #[test]
    fn big_ids_round_trip() {
        let f = BooleanFunction::from_family(&FunctionFamily::Exact(4), 8).unwrap();
        let g = BooleanFunction::from_id(8, &f.function_id()).unwrap();
        assert_eq!(f, g);
        let h = BooleanFunction::from_hex(8, &f.to_hex()).unwrap();
        assert_eq!(f, h);
    }

    #[test]
    fn restriction_examples() {
        let e2 = BooleanFunction::from_family(&FunctionFamily::Exact(2), 4).unwrap();
        let r = e2.restrict(1, false).unwrap();
        let e23 = BooleanFunction::from_family(&FunctionFamily::Exact(2), 3).unwrap();
        assert_eq!(r, e23);

        let and2 = BooleanFunction::and(2);
        let id1 = BooleanFunction::from_id_u64(1, 0b01).unwrap();
        assert_eq!(and2.restrict(1, true).unwrap(), id1);

        let p = BooleanFunction::parity(3).restrict(3, true).unwrap();
        assert_eq!(p, BooleanFunction::parity(2).negated());

        assert!(matches!(and2.restrict(0, true), Err(Error::Range(_))));
        assert!(matches!(and2.restrict(3, true), Err(Error::Range(_))));
    }

    #[test]
    fn restrict_middle_variable() {
        // SEL(x1,x2,x3) with x1 = 1 is x3, a function of the second remaining variable
        let sel = BooleanFunction::from_family(&FunctionFamily::Select, 3).unwrap();
        let r = sel.restrict(1, true).unwrap();
        assert_eq!(r, BooleanFunction::from_fn(2, |y| y & 1 == 1).unwrap());
        let r2 = sel.restrict(2, false).unwrap();
        // x1 ? x3 : 0
        assert_eq!(r2, BooleanFunction::and(2));
    }

    #[test]
    fn npn_examples() {
        let (_, or_id) = BooleanFunction::or(2).npn_canonical();
        assert_eq!(or_id, BigUint::from(1u32));
        let (_, xor_id) = BooleanFunction::parity(2).npn_canonical();
        assert_eq!(xor_id, BigUint::from(6u32));
        // the class containing NAE (ID 126) has minimum member 24 = [x ∈ {011, 100}]
        let nae = BooleanFunction::from_family(&FunctionFamily::NotAllEqual, 3).unwrap();
        let (rep, nae_id) = nae.npn_canonical();
        assert_eq!(nae_id, BigUint::from(24u32));
        assert_eq!(rep, BooleanFunction::from_id_u64(3, 24).unwrap());
        let f = BooleanFunction::from_id_u64(4, 12345).unwrap();
        assert_eq!(f.npn_canonical().1, f.negated().npn_canonical().1);
    }

    #[test]
    fn three_bit_table_ids_cover_all_classes() {
        let mut classes = std::collections::BTreeSet::new();
        for id in [1u64, 6, 7, 22, 23, 30, 53, 67, 105, 126] {
            let f = BooleanFunction::from_id_u64(3, id).unwrap();
            assert!(f.depends_on_all());
            classes.insert(f.npn_canonical().1);
        }
        assert_eq!(classes.len(), 10);
        let mut all = std::collections::BTreeSet::new();
        for id in 0..256u64 {
            let f = BooleanFunction::from_id_u64(3, id).unwrap();
            if f.depends_on_all() {
                all.insert(f.npn_canonical().1);
            }
        }
        assert_eq!(all, classes);
    }

    #[test]
    fn composition_examples() {
        let e2 = BooleanFunction::from_family(&FunctionFamily::Exact(2), 4).unwrap();
        let composed = BooleanFunction::and(2).compose_blocks(&e2).unwrap();
        assert_eq!(composed.arity(), 8);
        for x in 0..256usize {
            let expect = weight(x >> 4) == 2 && weight(x & 15) == 2;
            assert_eq!(composed.eval(x), expect);
        }
        let ident = BooleanFunction::from_id_u64(1, 1).unwrap();
        assert_eq!(ident.compose_blocks(&e2).unwrap(), e2);
        let p = BooleanFunction::parity(2);
        assert_eq!(p.compose_blocks(&p).unwrap(), BooleanFunction::parity(4));
        assert!(matches!(
            BooleanFunction::parity(3).compose_blocks(&BooleanFunction::parity(6)),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn dependence_and_symmetry() {
        let f = BooleanFunction::from_id_u64(3, 0b0000_1111).unwrap(); // f = not x1
        assert!(f.depends_on(1) && !f.depends_on(2) && !f.depends_on(3));
        assert_eq!(f.essential_arity(), 1);
        let maj = BooleanFunction::from_family(&FunctionFamily::Majority, 3).unwrap();
        assert_eq!(
            maj.symmetric_profile(),
            Some(vec![false, false, true, true])
        );
        let sel = BooleanFunction::from_family(&FunctionFamily::Select, 3).unwrap();
        assert!(!sel.is_symmetric());
    }

    #[test]
    fn family_parsing() {
        assert_eq!(
            "exact_2".parse::<FunctionFamily>().unwrap(),
            FunctionFamily::Exact(2)
        );
        assert_eq!(
            "Th3".parse::<FunctionFamily>().unwrap(),
            FunctionFamily::Threshold(3)
        );
        assert_eq!(
            "SYM(0,0,1,1,0)".parse::<FunctionFamily>().unwrap(),
            FunctionFamily::Symmetric(vec![false, false, true, true, false])
        );
        assert!("WAT".parse::<FunctionFamily>().is_err());
    }

    #[test]
    fn json_shape() {
        let f = BooleanFunction::from_id_u64(3, 23).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"n":3,"id":"23"}"#);
        let back: BooleanFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        let big = BooleanFunction::parity(8);
        let json = serde_json::to_value(&big).unwrap();
        assert_eq!(json["table"].as_str().unwrap().len(), 64);
        let from_table: BooleanFunction =
            serde_json::from_str(&format!(r#"{{"n":8,"table":"{}"}}"#, big.to_hex())).unwrap();
        assert_eq!(from_table, big);
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(0).len(), 1);
    }
}
