//! JSON encoding of [`SdpSolution`] and the bundled exact fixtures.
//!
//! Each matrix is either dense (array of rows) or spectral: a list of
//! `{"value", "vectors"}` eigenspaces whose vectors need not be normalised
//! or mutually orthogonal. Scalars are numbers or arithmetic expressions
//! such as `"(5+sqrt(5))/4"`.

use num_bigint::BigUint;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{symmetrize, Matrix};

use super::SdpSolution;

/// Functions with a bundled exact two-query solution.
pub const FIXTURE_IDS: [u64; 2] = [7, 67];

/// Loads the bundled exact solution for a three-bit function.
pub fn fixture(id: u64) -> Result<SdpSolution> {
    let text = match id {
        7 => include_str!("../../fixtures/function7.json"),
        67 => include_str!("../../fixtures/function67.json"),
        _ => return Err(Error::Parameter(format!("no fixture for function {id}"))),
    };
    SdpSolution::from_json(text)
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl Serialize for SdpSolution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let m: Vec<Vec<Vec<Vec<f64>>>> = self.m.iter().map(|row| row.iter().map(rows).collect()).collect();
        let mut s = serializer.serialize_struct("SdpSolution", 7)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("t", &self.t)?;
        s.serialize_field("id", &self.id.to_string())?;
        s.serialize_field("eps", &self.eps)?;
        s.serialize_field("M", &m)?;
        s.serialize_field("Gamma0", &rows(&self.gamma0))?;
        s.serialize_field("Gamma1", &rows(&self.gamma1))?;
        s.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    fn value(&self) -> Result<f64> {
        match self {
            Scalar::Number(v) => Ok(*v),
            Scalar::Expr(s) => evaluate(s),
        }
    }
}

#[derive(Deserialize)]
struct Eigenspace {
    value: Scalar,
    vectors: Vec<Vec<Scalar>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixSpec {
    Dense(Vec<Vec<Scalar>>),
    Spectral(Vec<Eigenspace>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IdSpec {
    Number(u64),
    Text(String),
}

#[derive(Deserialize, Default, PartialEq)]
#[serde(rename_all = "lowercase")]
enum VariableOrder {
    #[default]
    Msb,
    Lsb,
}

#[derive(Deserialize)]
struct RawSolution {
    n: usize,
    t: usize,
    id: IdSpec,
    eps: Scalar,
    #[serde(default)]
    variable_order: VariableOrder,
    #[serde(rename = "M")]
    m: Vec<Vec<MatrixSpec>>,
    #[serde(rename = "Gamma0")]
    gamma0: MatrixSpec,
    #[serde(rename = "Gamma1")]
    gamma1: MatrixSpec,
}

impl MatrixSpec {
    fn build(&self, size: usize) -> Result<Matrix> {
        match self {
            MatrixSpec::Dense(rows) => {
                if rows.len() != size || rows.iter().any(|r| r.len() != size) {
                    return Err(Error::Shape(format!("dense matrix must be {size}x{size}")));
                }
                let mut m = Matrix::zeros(size, size);
                for (i, row) in rows.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        m[(i, j)] = v.value()?;
                    }
                }
                Ok(m)
            }
            MatrixSpec::Spectral(spaces) => {
                let mut m = Matrix::zeros(size, size);
                for space in spaces {
                    m += projector(&space.vectors, size)? * space.value.value()?;
                }
                Ok(symmetrize(&m))
            }
        }
    }
}

/// Orthogonal projector onto the span of the given vectors.
fn projector(vectors: &[Vec<Scalar>], size: usize) -> Result<Matrix> {
    if vectors.iter().any(|v| v.len() != size) {
        return Err(Error::Shape(format!("eigenvectors must have length {size}")));
    }
    let mut v = Matrix::zeros(size, vectors.len());
    for (k, vec) in vectors.iter().enumerate() {
        for (i, s) in vec.iter().enumerate() {
            v[(i, k)] = s.value()?;
        }
    }
    let gram = v.transpose() * &v;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Precondition("eigenvectors are linearly dependent".into()))?;
    Ok(&v * inv * v.transpose())
}

impl TryFrom<RawSolution> for SdpSolution {
    type Error = Error;

    fn try_from(raw: RawSolution) -> Result<Self> {
        if raw.n > super::MAX_SDP_ARITY {
            return Err(Error::Capacity(format!("solution arity {} is too large", raw.n)));
        }
        let size = 1usize << raw.n;
        let id = match raw.id {
            IdSpec::Number(v) => BigUint::from(v),
            IdSpec::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Serialization(format!("invalid function id '{s}'")))?,
        };
        let mut m: Vec<Vec<Matrix>> = raw
            .m
            .iter()
            .map(|row| row.iter().map(|spec| spec.build(size)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        if raw.variable_order == VariableOrder::Lsb && m.len() == raw.n + 1 {
            m[1..].reverse();
        }
        Ok(SdpSolution {
            n: raw.n,
            t: raw.t,
            id,
            eps: raw.eps.value()?,
            m,
            gamma0: raw.gamma0.build(size)?,
            gamma1: raw.gamma1.build(size)?,
        })
    }
}

impl<'de> Deserialize<'de> for SdpSolution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSolution::deserialize(deserializer)?;
        SdpSolution::try_from(raw).map_err(D::Error::custom)
    }
}

/// Evaluates `+ - * /`, parentheses, decimal literals and `sqrt(·)`.
pub(crate) fn evaluate(expr: &str) -> Result<f64> {
    let mut p = Parser {
        chars: expr.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
    };
    let v = p.sum()?;
    if p.pos != p.chars.len() {
        return Err(p.error());
    }
    Ok(v)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self) -> Error {
        let text: String = self.chars.iter().collect();
        Error::Serialization(format!("cannot parse '{text}' at offset {}", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<f64> {
        let mut v = self.product()?;
        loop {
            if self.eat('+') {
                v += self.product()?;
            } else if self.eat('-') {
                v -= self.product()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn product(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        if self.eat('(') {
            let v = self.sum()?;
            return if self.eat(')') { Ok(v) } else { Err(self.error()) };
        }
        if self.chars[self.pos..].starts_with(&['s', 'q', 'r', 't', '(']) {
            self.pos += 4;
            return Ok(self.unary()?.sqrt());
        }
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| self.error())
    }
}
