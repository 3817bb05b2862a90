use std::fmt;

use exactq::boolfn::{npn_classes, FunctionFamily};
use exactq::complexity::{five_bit_candidates, two_query_class_representatives};
use exactq::extract::extract_algorithm;
use exactq::nonadaptive::{classify_symmetric, nonadaptive_algorithm, q_na};
use exactq::sdp::{build_instance, fixture, solve_min_error, verify_solution, SolverConfig, EXACT_THRESHOLD, FIXTURE_IDS};
use exactq::simulate::{balanced_algorithm, exact2_algorithm, min_success};
use exactq::BooleanFunction;

use crate::pool::map_ordered;

pub const FIXTURE_TOL: f64 = 1e-9;
const FIXTURE_SUCCESS_TOL: f64 = 1e-8;
const EXACT2_TOL: f64 = 1e-12;
const BALANCED_TOL: f64 = 1e-10;
const NONADAPTIVE_TOL: f64 = 1e-10;
const BALANCED_SIZES: [usize; 3] = [4, 6, 8];

#[derive(Default)]
pub struct Report {
    lines: Vec<(bool, String, String)>,
}

impl Report {
    pub fn record(&mut self, ok: bool, name: impl Into<String>, detail: impl Into<String>) {
        self.lines.push((ok, name.into(), detail.into()));
    }

    pub fn failures(&self) -> Vec<&str> {
        self.lines.iter().filter(|l| !l.0).map(|l| l.1.as_str()).collect()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (ok, name, detail) in &self.lines {
            writeln!(f, "{} {name}: {detail}", if *ok { "PASS" } else { "FAIL" })?;
        }
        Ok(())
    }
}

pub fn fixtures(report: &mut Report, tol: f64) {
    for id in FIXTURE_IDS {
        let name = format!("fixture {id}");
        let outcome = (|| -> exactq::Result<(f64, f64)> {
            let sol = fixture(id)?;
            let f = sol.function()?;
            let verified = verify_solution(&build_instance(&f, sol.t)?, &sol, tol)?;
            let alg = extract_algorithm(&sol, false)?;
            let success = min_success(&alg, &f)?;
            let residual = if verified.passed() { verified.max_residual() } else { f64::INFINITY };
            Ok((residual, success))
        })();
        match outcome {
            Ok((residual, success)) => report.record(
                residual <= tol && success >= 1.0 - FIXTURE_SUCCESS_TOL,
                name,
                format!("max residual {residual:.1e}, min success {success:.10}"),
            ),
            Err(e) => report.record(false, name, e.to_string()),
        }
    }
}

pub fn builtins(report: &mut Report) {
    let exact2 = BooleanFunction::from_family(&FunctionFamily::Exact(2), 4).expect("valid family");
    match min_success(&exact2_algorithm(), &exact2) {
        Ok(s) => report.record(s >= 1.0 - EXACT2_TOL, "builtin EXACT_2", format!("min success {s:.12}")),
        Err(e) => report.record(false, "builtin EXACT_2", e.to_string()),
    }
    for n in BALANCED_SIZES {
        let name = format!("builtin balanced n={n}");
        match balanced_algorithm(n).and_then(|alg| alg.min_success()) {
            Ok(s) => report.record(s >= 1.0 - BALANCED_TOL, name, format!("min success {s:.12}")),
            Err(e) => report.record(false, name, e.to_string()),
        }
    }
}

/// Simulated exactness of the nonadaptive algorithms on every class of `n`
/// bits (n ≤ 4) and agreement of the symmetric classification with the
/// brute-force radius (n ≤ 6).
pub fn stars(report: &mut Report, n: usize) {
    if n <= 4 {
        let name = format!("nonadaptive algorithms n={n}");
        let outcome = (|| -> exactq::Result<(usize, Vec<String>)> {
            let classes = npn_classes(n)?;
            let mut bad = Vec::new();
            for f in &classes {
                let alg = nonadaptive_algorithm(f)?;
                let s = min_success(&alg, f)?;
                if alg.t() != q_na(f)? || s < 1.0 - NONADAPTIVE_TOL {
                    bad.push(f.function_id().to_string());
                }
            }
            Ok((classes.len(), bad))
        })();
        match outcome {
            Ok((count, bad)) => report.record(
                bad.is_empty(),
                name,
                if bad.is_empty() {
                    format!("{count} classes exact with q_na queries")
                } else {
                    format!("inexact for {}", bad.join(" "))
                },
            ),
            Err(e) => report.record(false, name, e.to_string()),
        }
    }
    let name = format!("symmetric classification n={n}");
    let outcome = (|| -> exactq::Result<(usize, Vec<String>)> {
        let mut bad = Vec::new();
        let mut count = 0;
        for code in 0..1u64 << (n + 1) {
            let profile: Vec<bool> = (0..=n).map(|k| code >> (n - k) & 1 == 1).collect();
            let f = BooleanFunction::from_family(&FunctionFamily::Symmetric(profile), n)?;
            let (_, value) = classify_symmetric(&f)?;
            if value != q_na(&f)? {
                bad.push(f.function_id().to_string());
            }
            count += 1;
        }
        Ok((count, bad))
    })();
    match outcome {
        Ok((count, bad)) => report.record(
            bad.is_empty(),
            name,
            if bad.is_empty() {
                format!("{count} functions agree with the covering radius")
            } else {
                format!("mismatch for {}", bad.join(" "))
            },
        ),
        Err(e) => report.record(false, name, e.to_string()),
    }
}

pub fn search_five_bit(report: &mut Report, count_only: bool, jobs: usize, cfg: &SolverConfig, progress: bool) {
    let candidates = match five_bit_candidates(Some(&two_query_class_representatives())) {
        Ok(c) => c,
        Err(e) => {
            report.record(false, "five-bit search", e.to_string());
            return;
        }
    };
    report.record(true, "five-bit candidates", format!("{} candidates", candidates.len()));
    if count_only {
        return;
    }
    let outcomes = map_ordered(
        &candidates,
        jobs,
        |f| build_instance(f, 2).and_then(|inst| solve_min_error(&inst, cfg)).map(|s| s.success_probability()),
        |done, total, _| {
            if progress && (done % 100 == 0 || done == total) {
                eprintln!("[{done}/{total}] two-query solves");
            }
        },
    );
    let mut exact = Vec::new();
    let mut failed = Vec::new();
    let mut best: f64 = 0.0;
    for (f, outcome) in candidates.iter().zip(&outcomes) {
        match outcome {
            Ok(p) if *p > EXACT_THRESHOLD => exact.push(f.function_id().to_string()),
            Ok(p) => best = best.max(*p),
            Err(e) => failed.push(format!("{} ({e})", f.function_id())),
        }
    }
    report.record(
        exact.is_empty(),
        "five-bit two-query search",
        if exact.is_empty() {
            format!("no candidate exceeds {EXACT_THRESHOLD} (best {best:.4})")
        } else {
            format!("exceeding {EXACT_THRESHOLD}: {}", exact.join(" "))
        },
    );
    if !failed.is_empty() {
        report.record(false, "five-bit solver failures", failed.join("; "));
    }
}
