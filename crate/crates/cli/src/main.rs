mod pool;
mod table;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use exactq::boolfn::{profile_string, MAX_NPN_SWEEP_ARITY};
use exactq::complexity::ComplexityReport;
use exactq::extract::extract_algorithm;
use exactq::nonadaptive::{classify_symmetric, q_na_witness};
use exactq::sdp::{build_instance, solve_min_error, SolverConfig, MAX_SDP_ARITY};
use exactq::{BooleanFunction, FunctionFamily};
use num_bigint::BigUint;

use table::{default_t_max, family_names, full_classes, name_of, render, symmetric_classes, Format, TableRow};
use verify::Report;

/// Optimal success probabilities of quantum query algorithms for small
/// boolean functions.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Complexity measures and optimal success per query count for one function.
    Analyze(AnalyzeArgs),
    /// Table over all NPN classes (or symmetric functions) of a given arity.
    Sweep(SweepArgs),
    /// Fixture, builtin-algorithm and nonadaptive consistency checks.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Feasibility tolerance for solver certification and fixture checks.
    #[arg(long, env = "EXACTQ_TOL")]
    tol: Option<f64>,
    /// Per-instance time limit in seconds.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
}

impl SolverArgs {
    fn config(&self) -> anyhow::Result<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                bail!(usage(format!("--tol must lie in (0, 1), got {tol}")));
            }
            cfg.feas_tol = tol;
        }
        if !(self.time_limit > 0.0) {
            bail!(usage("--time-limit must be positive"));
        }
        cfg.time_limit = Some(Duration::from_secs_f64(self.time_limit));
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Number of input bits.
    #[arg(long)]
    n: usize,
    /// Truth-table ID: f(0…0) is the most significant bit.
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    id: Option<String>,
    /// Named family such as PARITY, MAJ, NAE, SEL, EXACT_2, TH_3 or SYM(0,1,1,0).
    #[arg(long)]
    family: Option<String>,
    /// Largest query count (default n - 1).
    #[arg(long)]
    t: Option<usize>,
    /// Table format instead of the plain report.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the extracted algorithm for the largest query count as JSON.
    #[arg(long)]
    emit: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Number of input bits.
    #[arg(long)]
    n: usize,
    /// Only symmetric functions, up to negation of inputs and output.
    #[arg(long)]
    symmetric_only: bool,
    /// Largest query count (default n - 1).
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Suppress progress on stderr.
    #[arg(long)]
    quiet: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Bundled exact solutions: constraint residuals and extracted algorithms.
    #[arg(long)]
    fixtures: bool,
    /// Built-in EXACT_2 and balanced-weight algorithms.
    #[arg(long)]
    builtins: bool,
    /// Nonadaptive algorithms and symmetric classification on this many bits.
    #[arg(long)]
    n: Option<usize>,
    /// Five-bit candidates for functions with two-query exact algorithms.
    #[arg(long)]
    search_5bit: bool,
    /// With --search-5bit, only count the candidates.
    #[arg(long, requires = "search_5bit")]
    count_only: bool,
    /// Worker threads for the candidate search.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Suppress progress on stderr.
    #[arg(long)]
    quiet: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn parse_function(n: usize, id: Option<&str>, family: Option<&str>) -> anyhow::Result<BooleanFunction> {
    if n > MAX_SDP_ARITY {
        bail!(usage(format!("n = {n} exceeds the supported maximum of {MAX_SDP_ARITY}")));
    }
    let parsed = match (id, family) {
        (Some(id), _) => {
            let id = id.trim();
            let value = match id.strip_prefix("0x") {
                Some(hex) => BigUint::parse_bytes(hex.as_bytes(), 16),
                None => BigUint::parse_bytes(id.as_bytes(), 10),
            }
            .ok_or_else(|| usage(format!("invalid function ID {id:?}")))?;
            BooleanFunction::from_id(n, &value)
        }
        (None, Some(name)) => {
            let family: FunctionFamily = name.parse().map_err(|e: exactq::Error| usage(e.to_string()))?;
            BooleanFunction::from_family(&family, n)
        }
        (None, None) => bail!(usage("either --id or --family is required")),
    };
    parsed.map_err(|e| usage(e.to_string()).into())
}

fn check_t(n: usize, t: Option<usize>) -> anyhow::Result<usize> {
    let t_max = t.unwrap_or_else(|| default_t_max(n));
    if t_max == 0 || t_max > n.max(1) {
        bail!(usage(format!("--t must lie in 1..={}", n.max(1))));
    }
    Ok(t_max)
}

fn analyze(args: &AnalyzeArgs) -> anyhow::Result<bool> {
    let f = parse_function(args.n, args.id.as_deref(), args.family.as_deref())?;
    if args.n == 0 {
        bail!(usage("n must be at least 1"));
    }
    let t_max = check_t(args.n, args.t)?;
    let cfg = args.solver.config()?;
    let (canonical, canonical_id) = f.npn_canonical();
    let name = name_of(&canonical, &family_names(args.n));
    let row = TableRow::compute(&f, name.clone(), t_max, &cfg)?;

    if let Some(path) = &args.emit {
        let sol = solve_min_error(&build_instance(&f, t_max)?, &cfg).context("solving for --emit")?;
        let alg = extract_algorithm(&sol, true).context("extracting the algorithm")?;
        std::fs::write(path, alg.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }

    match args.format {
        Some(format) => print!("{}", render(std::slice::from_ref(&row), t_max, format)),
        None => {
            let report = ComplexityReport::compute(&f)?;
            let (q, witness) = q_na_witness(&f)?;
            println!("function   {} (n = {})", row.id, args.n);
            println!("class      {canonical_id}");
            if let Some(name) = &name {
                println!("name       {name}");
            }
            println!("D          {}", report.decision_tree_depth);
            println!("deg        {}", report.deg_real);
            println!("deg_f2     {}", report.deg_f2);
            println!("q_na       {q} (center {witness:0width$b})", width = args.n);
            if let Ok((class, _)) = classify_symmetric(&f) {
                println!("symmetric  {class}");
            }
            for cell in &row.cells {
                match cell.success {
                    Some(p) => println!("t={:<8} {:<7} {p:.6}", cell.t, cell.text()),
                    None => println!("t={:<8} {:<7} {}", cell.t, cell.text(), cell.error.as_deref().unwrap_or("")),
                }
            }
            if let Some(path) = &args.emit {
                println!("algorithm  {}", path.display());
            }
        }
    }
    Ok(!row.failed())
}

fn sweep(args: &SweepArgs) -> anyhow::Result<bool> {
    let n = args.n;
    if n == 0 {
        bail!(usage("n must be at least 1"));
    }
    if args.symmetric_only && n > MAX_SDP_ARITY {
        bail!(usage(format!("symmetric sweeps support n ≤ {MAX_SDP_ARITY}")));
    }
    if !args.symmetric_only && n > MAX_NPN_SWEEP_ARITY {
        bail!(usage(format!(
            "full sweeps support n ≤ {MAX_NPN_SWEEP_ARITY}; use --symmetric-only for up to {MAX_SDP_ARITY} bits"
        )));
    }
    let t_max = check_t(n, args.t)?;
    let cfg = args.solver.config()?;

    let items: Vec<(BooleanFunction, Option<String>)> = if args.symmetric_only {
        symmetric_classes(n)
            .into_iter()
            .map(|(p, f)| (f, Some(format!("SYM{}", profile_string(&p)))))
            .collect()
    } else {
        let names = family_names(n);
        full_classes(n)?
            .into_iter()
            .map(|f| {
                let name = name_of(&f, &names);
                (f, name)
            })
            .collect()
    };
    let quiet = args.quiet;
    let rows = pool::map_ordered(
        &items,
        args.jobs,
        |(f, name)| TableRow::compute(f, name.clone(), t_max, &cfg),
        |done, total, i| {
            if !quiet {
                eprintln!("[{done}/{total}] {}", items[i].0.function_id());
            }
        },
    );
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    print!("{}", render(&rows, t_max, args.format));
    Ok(rows.iter().all(|r| !r.failed()))
}

fn verify(args: &VerifyArgs) -> anyhow::Result<bool> {
    let cfg = args.solver.config()?;
    let mut report = Report::default();
    let nothing_selected = !args.fixtures && !args.builtins && args.n.is_none() && !args.search_5bit;
    if args.fixtures || nothing_selected {
        verify::fixtures(&mut report, args.solver.tol.unwrap_or(verify::FIXTURE_TOL));
    }
    if args.builtins || nothing_selected {
        verify::builtins(&mut report);
    }
    if let Some(n) = args.n {
        if n == 0 || n > MAX_SDP_ARITY {
            bail!(usage(format!("--n must lie in 1..={MAX_SDP_ARITY}")));
        }
        verify::stars(&mut report, n);
    }
    if args.search_5bit {
        verify::search_five_bit(&mut report, args.count_only, args.jobs, &cfg, !args.quiet);
    }
    print!("{report}");
    let failures = report.failures();
    if !failures.is_empty() {
        eprintln!("failed checks: {}", failures.join(", "));
    }
    Ok(failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
