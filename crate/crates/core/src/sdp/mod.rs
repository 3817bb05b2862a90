//! Semidefinite programs for `t`-query algorithms.
//!
//! For a function `f` on `n` bits the unknowns are `(n+1)·t` Gram matrices
//! `M_i^(j)` plus the output matrices `Γ₀, Γ₁`, all `2^n × 2^n` and PSD:
//!
//! 1. `Σ_i M_i^(0) = J`
//! 2. `Σ_i M_i^(j) = Σ_i E_i ∘ M_i^(j-1)` for `1 ≤ j < t`
//! 3. `Γ₀ + Γ₁ = Σ_i E_i ∘ M_i^(t-1)`
//! 4. `Γ₀[x,x] ≥ 1 - ε` whenever `f(x) = 0`
//! 5. `Γ₁[x,x] ≥ 1 - ε` whenever `f(x) = 1`
//!
//! A `t`-query algorithm with error `ε` exists iff the system is feasible.

mod ipm;
mod reduced;
mod serial;

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use crate::boolfn::{input_bit, BooleanFunction};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, min_eigenvalue, rank, Matrix};

use ipm::IpmOptions;
use reduced::{Lifted, MarginProblem, Reduction};

pub use serial::{fixture, FIXTURE_IDS};

/// Largest arity accepted by [`build_instance`].
pub const MAX_SDP_ARITY: usize = 6;

/// Success probabilities above this are reported as exact.
pub const EXACT_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone)]
pub struct SdpInstance {
    f: BooleanFunction,
    t: usize,
    signs: Vec<Matrix>,
    outputs: [Matrix; 2],
}

impl SdpInstance {
    pub fn n(&self) -> usize {
        self.f.arity()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.f
    }

    /// `E_i[x,y] = (-1)^(x_i + y_i)`, with `E_0` the all-ones matrix.
    pub fn sign_matrix(&self, i: usize) -> &Matrix {
        &self.signs[i]
    }

    /// Diagonal indicator of `f(x) = z`.
    pub fn output_projector(&self, z: bool) -> &Matrix {
        &self.outputs[z as usize]
    }
}

pub fn build_instance(f: &BooleanFunction, t: usize) -> Result<SdpInstance> {
    let n = f.arity();
    if t == 0 || t > n {
        return Err(Error::Parameter(format!("query count {t} must lie in 1..={n}")));
    }
    if n > MAX_SDP_ARITY {
        return Err(Error::Capacity(format!(
            "SDP instances are limited to {MAX_SDP_ARITY} bits, got {n}"
        )));
    }
    let size = f.len();
    let signs = (0..=n)
        .map(|i| {
            let s: Vec<f64> = (0..size)
                .map(|x| if i > 0 && input_bit(x, i, n) { -1.0 } else { 1.0 })
                .collect();
            Matrix::from_fn(size, size, |x, y| s[x] * s[y])
        })
        .collect();
    let outputs = [false, true].map(|z| {
        Matrix::from_fn(size, size, |x, y| if x == y && f.eval(x) == z { 1.0 } else { 0.0 })
    });
    Ok(SdpInstance {
        f: f.clone(),
        t,
        signs,
        outputs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Accuracy of the returned optimal error.
    pub opt_tol: f64,
    /// Bound on equality residuals and negative eigenvalues.
    pub feas_tol: f64,
    pub max_iters: usize,
    /// Wall-clock budget for one solve, bisection probes included.
    pub time_limit: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            opt_tol: 1e-5,
            feas_tol: 1e-7,
            max_iters: 100,
            time_limit: None,
        }
    }
}

impl SolverConfig {
    fn ipm(&self) -> IpmOptions {
        IpmOptions {
            gap_tol: (self.opt_tol * 1e-3).min(1e-8),
            feas_tol: (self.feas_tol * 1e-2).min(1e-9),
            max_iters: self.max_iters,
            deadline: self.time_limit.map(|d| Instant::now() + d),
            ..IpmOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub n: usize,
    pub t: usize,
    pub id: BigUint,
    pub eps: f64,
    /// `m[i][j]` is `M_i^(j)`.
    pub m: Vec<Vec<Matrix>>,
    pub gamma0: Matrix,
    pub gamma1: Matrix,
}

impl SdpSolution {
    pub fn success_probability(&self) -> f64 {
        1.0 - self.eps
    }

    pub fn is_exact(&self) -> bool {
        self.success_probability() > EXACT_THRESHOLD
    }

    pub fn gamma(&self, z: bool) -> &Matrix {
        if z {
            &self.gamma1
        } else {
            &self.gamma0
        }
    }

    pub fn function(&self) -> Result<BooleanFunction> {
        BooleanFunction::from_id(self.n, &self.id)
    }

    /// Largest numerical rank among all `M_i^(j)` and `Γ_z`.
    pub fn max_rank(&self, tol: f64) -> usize {
        self.m
            .iter()
            .flatten()
            .chain([&self.gamma0, &self.gamma1])
            .map(|m| rank(m, tol))
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    fn from_lifted(inst: &SdpInstance, lifted: Lifted) -> Self {
        let [gamma0, gamma1] = lifted.gamma;
        Self {
            n: inst.n(),
            t: inst.t,
            id: inst.f.function_id(),
            eps: lifted.eps.clamp(0.0, 1.0),
            m: lifted.m,
            gamma0,
            gamma1,
        }
    }
}

/// Minimises `ε` directly with the interior-point method.
pub fn solve_min_error(inst: &SdpInstance, cfg: &SolverConfig) -> Result<SdpSolution> {
    let red = Reduction::new(&inst.f, inst.t);
    let (x0, lp0) = red.start(1.0);
    let out = red.problem.solve(x0, lp0, &cfg.ipm())?;
    let sol = SdpSolution::from_lifted(inst, red.lift(&out.point.x, &out.point.x_lp));
    certify(inst, sol, cfg, out.iterations)
}

/// Bisects on `ε`, deciding each candidate by maximising the distance to
/// the boundary of the cone at that fixed error.
pub fn solve_by_bisection(inst: &SdpInstance, cfg: &SolverConfig) -> Result<SdpSolution> {
    let red = Reduction::new(&inst.f, inst.t);
    let opts = cfg.ipm();
    let mut iterations = 0;
    let mut probe = |eps: f64| -> Result<(f64, Lifted)> {
        let margin = MarginProblem::new(&red.problem, &[(red.eps_index(), eps)]);
        let (x0, lp0) = red.start(eps);
        let (x0, lp0) = margin.start(&x0, &lp0)?;
        let out = margin.problem.solve(x0, lp0, &opts)?;
        iterations += out.iterations;
        let (x, x_lp) = margin.recover(&out.point);
        Ok((margin.margin(&out.point), red.lift(&x, &x_lp)))
    };
    let accept = |lambda: f64| lambda >= -cfg.feas_tol * 1e-2;

    let (lambda, at_zero) = probe(0.0)?;
    let best = if accept(lambda) {
        at_zero
    } else {
        let (_, mut best) = probe(1.0)?;
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > cfg.opt_tol {
            let mid = 0.5 * (lo + hi);
            let (lambda, lifted) = probe(mid)?;
            if accept(lambda) {
                hi = mid;
                best = lifted;
            } else {
                lo = mid;
            }
        }
        best
    };
    let sol = SdpSolution::from_lifted(inst, best);
    certify(inst, sol, cfg, iterations)
}

fn certify(inst: &SdpInstance, sol: SdpSolution, cfg: &SolverConfig, iterations: usize) -> Result<SdpSolution> {
    let report = verify_solution(inst, &sol, cfg.feas_tol)?;
    if !report.passed() {
        return Err(Error::SolverFailure {
            iterations,
            primal_residual: report.max_residual(),
            dual_residual: f64::NAN,
            gap: f64::NAN,
        });
    }
    Ok(sol)
}

/// A checked constraint family.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// (1) `Σ_i M_i^(0) = J`.
    Initial,
    /// (2) at level `j`.
    Propagation(usize),
    /// (3) `Γ₀ + Γ₁ = Σ_i E_i ∘ M_i^(t-1)`.
    Output,
    /// (4) zero-inputs accepted with probability `≥ 1 - ε`.
    Reject,
    /// (5) one-inputs accepted with probability `≥ 1 - ε`.
    Accept,
    /// `0 ≤ ε ≤ 1`.
    ErrorRange,
    /// Symmetry and positive semidefiniteness of one matrix.
    Psd(String),
}

impl Constraint {
    /// Equation number in the list at the top of this module.
    pub fn equation(&self) -> Option<usize> {
        match self {
            Constraint::Initial => Some(1),
            Constraint::Propagation(_) => Some(2),
            Constraint::Output => Some(3),
            Constraint::Reject => Some(4),
            Constraint::Accept => Some(5),
            Constraint::ErrorRange | Constraint::Psd(_) => None,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Initial => write!(f, "(1) sum_i M_i^(0) = J"),
            Constraint::Propagation(j) => write!(f, "(2) level {j}"),
            Constraint::Output => write!(f, "(3) Gamma0 + Gamma1"),
            Constraint::Reject => write!(f, "(4) Gamma0 diagonal"),
            Constraint::Accept => write!(f, "(5) Gamma1 diagonal"),
            Constraint::ErrorRange => write!(f, "eps in [0, 1]"),
            Constraint::Psd(name) => write!(f, "PSD {name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCheck {
    pub constraint: Constraint,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<ConstraintCheck>,
    pub tol: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.residual <= self.tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(move |c| c.residual > self.tol)
    }

    /// Equation numbers of every violated equality or inequality.
    pub fn violated_equations(&self) -> Vec<usize> {
        let mut eqs: Vec<usize> = self.failures().filter_map(|c| c.constraint.equation()).collect();
        eqs.dedup();
        eqs
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.residual <= self.tol { "ok" } else { "FAIL" };
            writeln!(f, "{status:>4}  {:<24} {:.3e}", c.constraint.to_string(), c.residual)?;
        }
        Ok(())
    }
}

fn check_shapes(inst: &SdpInstance, sol: &SdpSolution) -> Result<()> {
    let n = inst.n();
    let size = inst.dim();
    if sol.n != n || sol.t != inst.t {
        return Err(Error::Shape(format!(
            "solution is for n={}, t={} but instance has n={n}, t={}",
            sol.n, sol.t, inst.t
        )));
    }
    if sol.m.len() != n + 1 || sol.m.iter().any(|row| row.len() != inst.t) {
        return Err(Error::Shape(format!("expected {} x {} matrices M_i^(j)", n + 1, inst.t)));
    }
    for m in sol.m.iter().flatten().chain([&sol.gamma0, &sol.gamma1]) {
        if m.nrows() != size || m.ncols() != size {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, expected {size}x{size}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    Ok(())
}

/// Checks a candidate solution against every constraint.
pub fn verify_solution(inst: &SdpInstance, sol: &SdpSolution, tol: f64) -> Result<VerificationReport> {
    check_shapes(inst, sol)?;
    let n = inst.n();
    let size = inst.dim();
    let mut checks = Vec::new();
    let mut push = |constraint, residual: f64| checks.push(ConstraintCheck { constraint, residual });

    let phased = |j: usize| -> Matrix {
        (0..=n).fold(Matrix::zeros(size, size), |acc, i| {
            acc + sol.m[i][j].component_mul(&inst.signs[i])
        })
    };
    let level_sum = |j: usize| -> Matrix { (0..=n).fold(Matrix::zeros(size, size), |acc, i| acc + &sol.m[i][j]) };

    push(Constraint::Initial, max_abs(&(level_sum(0) - &inst.signs[0])));
    for j in 1..inst.t {
        push(Constraint::Propagation(j), max_abs(&(level_sum(j) - phased(j - 1))));
    }
    push(
        Constraint::Output,
        max_abs(&(&sol.gamma0 + &sol.gamma1 - phased(inst.t - 1))),
    );
    for (z, constraint) in [(false, Constraint::Reject), (true, Constraint::Accept)] {
        let gamma = sol.gamma(z);
        let shortfall = (0..size)
            .filter(|&x| inst.f.eval(x) == z)
            .map(|x| (1.0 - sol.eps) - gamma[(x, x)])
            .fold(0.0, f64::max);
        push(constraint, shortfall);
    }
    push(Constraint::ErrorRange, (-sol.eps).max(sol.eps - 1.0).max(0.0));

    let psd = |m: &Matrix| max_abs(&(m - m.transpose())).max(-min_eigenvalue(m)).max(0.0);
    for (i, row) in sol.m.iter().enumerate() {
        for (j, m) in row.iter().enumerate() {
            push(Constraint::Psd(format!("M_{i}^({j})")), psd(m));
        }
    }
    push(Constraint::Psd("Gamma0".into()), psd(&sol.gamma0));
    push(Constraint::Psd("Gamma1".into()), psd(&sol.gamma1));
    Ok(VerificationReport { checks, tol })
}
