//! The `omd-bench` harness: build instances, run the algorithms, check the
//! theoretical bounds and print result tables.
//!
//! Exit codes: 0 all runs finished and every bound check passed, 1 a bound
//! check (or a `--verify` audit) failed, 2 bad usage or unreadable input,
//! 3 a run hit its step budget.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::problem_gen::{default_run_params, generate, Family, GeneratorSpec};
use crate::prox::FEASIBILITY_TOL;
use crate::solver::{
    check_bounds, offline_comparator_over, regret, run, Algorithm, ComparatorDomain, RunReport,
    TraceFile,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Md,
    Csv,
    Json,
}

#[derive(Parser, Debug, Clone)]
#[command(
    name = "omd-bench",
    about = "Run constrained online Mirror Descent benchmarks and audit stored traces"
)]
pub struct BenchArgs {
    /// Examples to run: 1, 2, 3, 4 or remark4 (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub example: Vec<String>,

    /// Number of productive steps N (default: the reference N per example).
    #[arg(long)]
    pub n: Option<usize>,

    /// Algorithms to run: 1 non-adaptive, 2 adaptive, 3 adaptive multi-constraint.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub algorithms: Vec<u8>,

    /// Override ε (default 1/√N, or 0.5 for remark4).
    #[arg(long)]
    pub eps: Option<f64>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,

    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Dump every RunReport to this JSON file.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,

    /// Keep per-step iterates in the --trace-out file.
    #[arg(long)]
    pub trace_iterates: bool,

    /// Audit a stored trace file instead of running.
    #[arg(long)]
    pub verify: Option<PathBuf>,

    /// Cap on total steps per run (default: the worst-case bound plus slack).
    #[arg(long)]
    pub max_total_steps: Option<usize>,

    /// Iterations of the offline comparator used for regret.
    #[arg(long, default_value_t = 4000)]
    pub comparator_iters: usize,

    /// Report elapsed time as 0 so repeated runs give identical output.
    #[arg(long)]
    pub no_timing: bool,
}

/// One line of the result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResultRow {
    pub example: String,
    pub algorithm: u8,
    pub n: usize,
    pub seed: u64,
    pub eps: f64,
    pub nonprod: usize,
    pub time: f64,
    pub delta: f64,
    /// Against the best point with g(x) ≤ 0.
    pub regret: f64,
    /// Against the best point of Q, ignoring g.
    pub regret_q: f64,
    pub bounds_ok: bool,
}

#[derive(Debug)]
pub struct BenchOutcome {
    pub exit_code: i32,
    pub rows: Vec<BenchResultRow>,
    pub reports: Vec<RunReport>,
}

/// Parses `args` (including the program name) and runs the harness.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match BenchArgs::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(stderr, "{e}");
            if !e.use_stderr() {
                let _ = write!(stdout, "{e}");
            }
            return code;
        }
    };
    if let Some(path) = &args.verify {
        let (code, lines) = verify_trace(path);
        let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
        for l in lines {
            let _ = writeln!(sink, "{l}");
        }
        return code;
    }
    match run_bench(&args) {
        Ok(outcome) => match emit(&args, &outcome, stdout) {
            Ok(()) => {
                if outcome.exit_code == EXIT_BUDGET {
                    let _ = writeln!(stderr, "step budget exhausted; partial report written");
                }
                outcome.exit_code
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn parse_cells(args: &BenchArgs) -> Result<(Vec<Family>, Vec<Algorithm>)> {
    let mut families = Vec::new();
    for e in &args.example {
        let f = Family::from_example(e)
            .ok_or_else(|| Error::InvalidInput(format!("unknown example '{e}'")))?;
        if !families.contains(&f) {
            families.push(f);
        }
    }
    let mut algorithms = Vec::new();
    for &a in &args.algorithms {
        let alg = Algorithm::from_number(a)
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm {a}")))?;
        if !algorithms.contains(&alg) {
            algorithms.push(alg);
        }
    }
    if families.is_empty() || algorithms.is_empty() {
        return Err(Error::InvalidInput("nothing to run".into()));
    }
    families.sort();
    algorithms.sort();
    Ok((families, algorithms))
}

struct Prepared {
    instance: ProblemInstance,
    n: usize,
    eps: f64,
    comparator: f64,
    comparator_q: f64,
}

fn prepare(family: Family, args: &BenchArgs) -> Result<Prepared> {
    let spec = GeneratorSpec::new(family, args.n.unwrap_or(family.reference_n()), args.seed);
    let instance = generate(&spec)?;
    let params = default_run_params(&spec);
    let eps = args.eps.unwrap_or(params.eps);
    let comparator = offline_comparator_over(
        &instance,
        args.comparator_iters,
        ComparatorDomain::Constrained,
    )?
    .value;
    let comparator_q =
        offline_comparator_over(&instance, args.comparator_iters, ComparatorDomain::WholeSet)?
            .value;
    Ok(Prepared {
        instance,
        n: params.n,
        eps,
        comparator,
        comparator_q,
    })
}

enum CellResult {
    Done(BenchResultRow, RunReport),
    Exhausted(RunReport),
}

/// Runs every requested (example, algorithm) cell. Cells execute on the
/// rayon pool; results come back ordered by example, then algorithm.
pub fn run_bench(args: &BenchArgs) -> Result<BenchOutcome> {
    let (families, algorithms) = parse_cells(args)?;
    if let Some(e) = args.eps {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::InvalidInput(format!("--eps must be > 0, got {e}")));
        }
    }

    let prepared: BTreeMap<Family, Prepared> = families
        .par_iter()
        .map(|&f| prepare(f, args).map(|p| (f, p)))
        .collect::<Result<_>>()?;

    let cells: Vec<(Family, Algorithm)> = families
        .iter()
        .flat_map(|&f| algorithms.iter().map(move |&a| (f, a)))
        .collect();

    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|&(family, alg)| {
            let p = &prepared[&family];
            let mut config = crate::solver::RunConfig::new(p.n, p.eps, alg)?.seed(args.seed);
            if let Some(cap) = args.max_total_steps {
                config = config.max_total_steps(cap.max(p.n));
            }
            let mut report = match run(&p.instance, &config) {
                Ok(r) => r,
                Err(Error::BudgetExhausted { partial, .. }) => {
                    let mut partial = *partial;
                    if args.no_timing {
                        partial.elapsed_secs = 0.0;
                    }
                    return Ok(CellResult::Exhausted(partial));
                }
                Err(e) => return Err(e),
            };
            if args.no_timing {
                report.elapsed_secs = 0.0;
            }
            let r = regret(&report, &p.instance, p.comparator)?;
            let r_q = regret(&report, &p.instance, p.comparator_q)?;
            report.regret = Some(r);
            let check = check_bounds(&report, r);
            let row = BenchResultRow {
                example: family.example_label().to_string(),
                algorithm: alg.number(),
                n: report.n,
                seed: args.seed,
                eps: p.eps,
                nonprod: report.n_j,
                time: report.elapsed_secs,
                delta: report.delta,
                regret: r,
                regret_q: r_q,
                bounds_ok: check.all_passed(),
            };
            Ok(CellResult::Done(row, report))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut exhausted = false;
    for r in results {
        match r {
            CellResult::Done(row, report) => {
                rows.push(row);
                reports.push(report);
            }
            CellResult::Exhausted(report) => {
                exhausted = true;
                reports.push(report);
            }
        }
    }
    let exit_code = if exhausted {
        EXIT_BUDGET
    } else if rows.iter().all(|r| r.bounds_ok) {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    Ok(BenchOutcome {
        exit_code,
        rows,
        reports,
    })
}

fn emit(args: &BenchArgs, outcome: &BenchOutcome, stdout: &mut dyn Write) -> Result<()> {
    let table = render(&outcome.rows, args.format)?;
    match &args.out {
        Some(path) => std::fs::write(path, table)?,
        None => stdout.write_all(table.as_bytes())?,
    }
    if let Some(path) = &args.trace_out {
        let reports = if args.trace_iterates {
            outcome.reports.clone()
        } else {
            outcome
                .reports
                .iter()
                .map(RunReport::without_iterates)
                .collect()
        };
        TraceFile { reports }.write(path)?;
    }
    Ok(())
}

pub fn render(rows: &[BenchResultRow], format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(rows)? + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)
                    .map_err(|e| Error::Computation(format!("csv: {e}")))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::Computation(format!("csv: {e}")))?;
            String::from_utf8(bytes).map_err(|e| Error::Computation(e.to_string()))
        }
        Format::Md => {
            let mut s = String::new();
            s.push_str("| example | algorithm | N | seed | eps | nonprod. | time | δ | regret | regret (Q) | bounds |\n");
            s.push_str("|---|---|---|---|---|---|---|---|---|---|---|\n");
            for r in rows {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                    r.example,
                    r.algorithm,
                    r.n,
                    r.seed,
                    r.eps,
                    r.nonprod,
                    r.time,
                    r.delta,
                    r.regret,
                    r.regret_q,
                    if r.bounds_ok { "pass" } else { "FAIL" }
                );
            }
            Ok(s)
        }
    }
}

/// Re-audits a stored trace file.
///
/// Returns the exit code and one line per finding. Checks, per report:
/// step counts, the productivity dichotomy, the step-size rule, the
/// certificate (bit-exact), feasibility of stored iterates, and the
/// non-productive bounds (plus regret ≤ δ when regret was stored).
pub fn verify_trace(path: &Path) -> (i32, Vec<String>) {
    let file = match TraceFile::read(path) {
        Ok(f) => f,
        Err(e) => {
            return (
                EXIT_USAGE,
                vec![format!("cannot read {}: {e}", path.display())],
            )
        }
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for (idx, report) in file.reports.iter().enumerate() {
        let failures = audit_report(report);
        if failures.is_empty() {
            lines.push(format!("report {idx}: ok"));
        } else {
            ok = false;
            lines.extend(failures.into_iter().map(|f| format!("report {idx}: {f}")));
        }
    }
    (if ok { EXIT_OK } else { EXIT_CHECK_FAILED }, lines)
}

/// Names of the checks a stored report fails.
pub fn audit_report(report: &RunReport) -> Vec<String> {
    let mut out = Vec::new();
    let eps = report.config.eps;
    let trace = &report.trace;
    let productive = trace.iter().filter(|s| s.productive).count();

    if trace.len() != report.total_steps
        || productive != report.n
        || report.n != report.config.n
        || report.n + report.n_j != report.total_steps
        || !trace.last().is_some_and(|s| s.productive)
        || trace.iter().enumerate().any(|(k, s)| s.k != k)
    {
        out.push("step counts inconsistent".to_string());
    }

    if trace
        .iter()
        .any(|s| s.productive != (s.constraint_value <= eps))
    {
        out.push("productivity dichotomy violated".to_string());
    }

    let mut sum_sq = 0.0_f64;
    let step_rule_ok = trace.iter().all(|s| match report.config.algorithm {
        Algorithm::NonAdaptive => {
            s.h_k == eps / (report.lipschitz * report.lipschitz) && s.m_k == report.lipschitz
        }
        Algorithm::Adaptive | Algorithm::AdaptiveMulti => {
            sum_sq += s.m_k * s.m_k;
            if sum_sq > 0.0 {
                (s.h_k * sum_sq.sqrt() / report.theta0 - 1.0).abs() <= 1e-12
            } else {
                s.h_k == 0.0
            }
        }
    });
    if !step_rule_ok {
        out.push("step rule violated".to_string());
    }

    match report.recompute_delta() {
        Ok(d) if d.to_bits() == report.delta.to_bits() => {}
        Ok(_) => out.push("certificate mismatch".to_string()),
        Err(e) => out.push(format!("certificate mismatch ({e})")),
    }

    if trace
        .iter()
        .any(|s| !s.iterate.is_empty() && !report.setup.is_feasible(&s.iterate, FEASIBILITY_TOL))
    {
        out.push("infeasible iterate".to_string());
    }

    let check = check_bounds(report, report.regret.unwrap_or(f64::NEG_INFINITY));
    if !check.all_passed() {
        out.push(format!(
            "bound check failed: {}",
            check.failures().join("; ")
        ));
    }
    out
}
