use std::fmt::Write as _;

use exactq::boolfn::{npn_classes, profile_string, FunctionFamily};
use exactq::complexity::{decision_tree_depth, f2_degree};
use exactq::nonadaptive::q_na;
use exactq::sdp::{build_instance, solve_min_error, SolverConfig, EXACT_THRESHOLD};
use exactq::{BooleanFunction, Error};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Md,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub t: usize,
    pub success: Option<f64>,
    pub starred: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Cell {
    /// Three decimals, `1` above the exactness threshold, `*` when a
    /// nonadaptive exact algorithm exists.
    pub fn text(&self) -> String {
        let mut s = match (self.success, &self.error) {
            (Some(p), _) if p > EXACT_THRESHOLD => "1".to_string(),
            (Some(p), _) => format!("{p:.3}"),
            (None, Some(e)) if e.starts_with("time limit") => "timeout".to_string(),
            (None, _) => "fail".to_string(),
        };
        if self.starred {
            s.push('*');
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub id: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub cells: Vec<Cell>,
    pub deg_f2: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub q_na: usize,
}

impl TableRow {
    pub fn compute(f: &BooleanFunction, name: Option<String>, t_max: usize, cfg: &SolverConfig) -> Result<Self, Error> {
        let q = q_na(f)?;
        let cells = (1..=t_max)
            .map(|t| {
                let solved = build_instance(f, t).and_then(|inst| solve_min_error(&inst, cfg));
                let (success, error) = match solved {
                    Ok(sol) => (Some(sol.success_probability()), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                Cell {
                    t,
                    success,
                    starred: q <= t,
                    error,
                }
            })
            .collect();
        Ok(Self {
            id: f.function_id().to_string(),
            n: f.arity(),
            name,
            cells,
            deg_f2: f2_degree(f),
            d: decision_tree_depth(f)?,
            q_na: q,
        })
    }

    pub fn failed(&self) -> bool {
        self.cells.iter().any(|c| c.success.is_none())
    }
}

/// Default number of query columns: `1..=n-1`, at least one.
pub fn default_t_max(n: usize) -> usize {
    n.saturating_sub(1).max(1)
}

/// Family names keyed by NPN class, most specific first.
pub fn family_names(n: usize) -> Vec<(BooleanFunction, String)> {
    let mut named: Vec<(FunctionFamily, Option<&str>)> = vec![(FunctionFamily::Threshold(n), Some(if n == 1 { "x_1" } else { "AND" }))];
    if n >= 2 {
        named.push((FunctionFamily::Parity, None));
    }
    if n % 2 == 1 && n >= 3 {
        named.push((FunctionFamily::Majority, None));
    }
    if n == 3 {
        named.push((FunctionFamily::Select, None));
    }
    if n >= 3 {
        named.push((FunctionFamily::NotAllEqual, None));
    }
    for k in (1..n).rev() {
        named.push((FunctionFamily::Exact(k), None));
    }
    for k in (2..n).rev() {
        named.push((FunctionFamily::Threshold(k), None));
    }
    let mut out: Vec<(BooleanFunction, String)> = Vec::new();
    for (family, label) in named {
        let Ok(f) = BooleanFunction::from_family(&family, n) else {
            continue;
        };
        let canonical = f.npn_canonical().0;
        if out.iter().all(|(g, _)| *g != canonical) {
            out.push((canonical, label.map_or_else(|| family.to_string(), str::to_string)));
        }
    }
    out
}

pub fn name_of(canonical: &BooleanFunction, names: &[(BooleanFunction, String)]) -> Option<String> {
    if let Some(p) = canonical.symmetric_profile() {
        if let Some((_, name)) = names.iter().find(|(g, _)| g == canonical) {
            return Some(name.clone());
        }
        return Some(format!("SYM{}", profile_string(&p)));
    }
    names.iter().find(|(g, _)| g == canonical).map(|(_, s)| s.clone())
}

/// NPN classes depending on all `n` bits, by increasing canonical ID.
pub fn full_classes(n: usize) -> Result<Vec<BooleanFunction>, Error> {
    Ok(npn_classes(n)?.into_iter().filter(|f| f.depends_on_all()).collect())
}

/// Non-constant symmetric functions up to output negation and input
/// complementation, keyed by the lexicographically smallest profile.
pub fn symmetric_classes(n: usize) -> Vec<(Vec<bool>, BooleanFunction)> {
    let mut out = Vec::new();
    for code in 1..(1u64 << (n + 1)) - 1 {
        let profile: Vec<bool> = (0..=n).map(|k| code >> (n - k) & 1 == 1).collect();
        let reversed: Vec<bool> = profile.iter().rev().copied().collect();
        let negate = |p: &[bool]| -> Vec<bool> { p.iter().map(|b| !b).collect() };
        let images = [negate(&profile), reversed.clone(), negate(&reversed)];
        if images.iter().any(|img| *img < profile) {
            continue;
        }
        let f = BooleanFunction::from_family(&FunctionFamily::Symmetric(profile.clone()), n)
            .expect("profile length matches arity");
        out.push((profile, f));
    }
    out
}

pub fn render(rows: &[TableRow], t_max: usize, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialise");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("id,name");
            for t in 1..=t_max {
                let _ = write!(s, ",t{t}");
            }
            s.push_str(",deg_f2,D,q_na\n");
            for row in rows {
                let name = row.name.as_deref().unwrap_or("");
                let quoted = if name.contains(',') {
                    format!("\"{name}\"")
                } else {
                    name.to_string()
                };
                let _ = write!(s, "{},{quoted}", row.id);
                for cell in &row.cells {
                    let _ = write!(s, ",{}", cell.text());
                }
                let _ = writeln!(s, ",{},{},{}", row.deg_f2, row.d, row.q_na);
            }
            s
        }
        Format::Md => {
            let mut s = String::from("| ID | Function |");
            for t in 1..=t_max {
                let _ = write!(s, " t={t} |");
            }
            s.push_str(" deg_f2 | D | q_na |\n|---|---|");
            for _ in 1..=t_max {
                s.push_str("---|");
            }
            s.push_str("---|---|---|\n");
            for row in rows {
                let _ = write!(s, "| {} | {} |", row.id, row.name.as_deref().unwrap_or(""));
                for cell in &row.cells {
                    let _ = write!(s, " {} |", cell.text());
                }
                let _ = writeln!(s, " {} | {} | {} |", row.deg_f2, row.d, row.q_na);
            }
            s
        }
    }
}
