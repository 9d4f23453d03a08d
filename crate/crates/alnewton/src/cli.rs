//! Command-line drivers: problem ingestion, solver invocation, report
//! emission, and solution checking / benchmarking workflows.
//!
//! Exit codes: 0 converged / certified, 1 input error, 2 iteration budget
//! exhausted, 3 singular Newton system, 4 divergence, 5 certification
//! failure, 6 solver/oracle disagreement in bench.

use crate::bench::{self, Suite};
use crate::lagrangian::{PrimalDual, Problem};
use crate::linalg::inf_norm;
use crate::newton::{self, Formulation, NewtonConfig, SolveStatus};
use crate::oracle::{self, GridSpec, OracleConfig};
use crate::problem_io::{self, LoadedProblem};
use crate::prox::TieRule;
use crate::report::{self, BenchRow, ReportContext};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_MAX_ITERATIONS: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 5;
pub const EXIT_BENCH_DISAGREEMENT: i32 = 6;

/// Agreement threshold between the Newton solver and the first-order
/// oracle, relative to `1 + ||x_oracle||_inf`.
pub const BENCH_AGREEMENT_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "alnewton",
    about = "Newton-type solver for nonsmooth composite convex problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Solve a problem file and emit a convergence report.
    Solve(SolveArgs),
    /// Certify a candidate primal-dual pair against the optimality system.
    Check(CheckArgs),
    /// Run a benchmark suite against the first-order oracle.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FormulationArg {
    Direction,
    Fullstep,
    Activeset,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TieArg {
    Zero,
    One,
}

#[derive(Args)]
pub struct SolveArgs {
    /// Problem description file (TOML).
    #[arg(long)]
    pub problem: PathBuf,
    /// Penalty parameter; falls back to the file's default, then 1.0.
    #[arg(long)]
    pub c: Option<f64>,
    /// Residual tolerance; falls back to the file's default, then 1e-10.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration budget; falls back to the file's default, then 100.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Update formulation; defaults to activeset when phi permits it.
    #[arg(long, value_enum)]
    pub formulation: Option<FormulationArg>,
    /// Jacobian selection at kink points.
    #[arg(long, value_enum, default_value = "zero")]
    pub tie: TieArg,
    /// First-order warm-start iterations before the Newton loop.
    #[arg(long, default_value_t = 0)]
    pub warm_start: usize,
    /// Initial primal point: a vector file or "zeros".
    #[arg(long, default_value = "zeros")]
    pub x0: String,
    /// Initial multiplier: a vector file or "zeros".
    #[arg(long, default_value = "zeros")]
    pub lambda0: String,
    /// Report destination; stdout when omitted. A .json extension selects
    /// the machine-readable variant.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Candidate primal point (vector file).
    #[arg(long)]
    pub x: PathBuf,
    /// Candidate multiplier (vector file).
    #[arg(long)]
    pub lambda: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Certification tolerance on every reported residual.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = clap::value_parser!(Suite))]
    pub suite: Suite,
    /// Comma-separated problem sizes, each as NxM (e.g. "200x100,200x300").
    #[arg(long)]
    pub sizes: String,
    /// Comma-separated seeds (e.g. "0,1,2,3,4").
    #[arg(long)]
    pub seeds: String,
    /// Table destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl clap::builder::ValueParserFactory for Suite {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Suite>())
    }
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Check(args) => run_check(&args),
        Command::Bench(args) => run_bench(&args),
    }
}

fn status_exit(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::MaxIterations => EXIT_MAX_ITERATIONS,
        SolveStatus::SingularSystem => EXIT_SINGULAR,
        SolveStatus::Diverged => EXIT_DIVERGED,
    }
}

fn read_start_vector(spec: &str, expected: usize, what: &str) -> Result<DVector<f64>, String> {
    if spec == "zeros" {
        return Ok(DVector::zeros(expected));
    }
    let v = problem_io::read_vector_file(Path::new(spec)).map_err(|e| e.to_string())?;
    if v.len() != expected {
        return Err(format!("{what}: expected length {expected}, got {}", v.len()));
    }
    Ok(v)
}

fn default_formulation(p: &Problem) -> Formulation {
    // both supported phi kinds have 0/1 diagonal Jacobians, so the
    // active-set reduction always applies
    match p.phi() {
        crate::prox::ProxFunction::BoxIndicator { .. } | crate::prox::ProxFunction::L1Norm { .. } => {
            Formulation::ActiveSet
        }
    }
}

fn emit(output: Option<&Path>, body: &str) -> Result<(), String> {
    match output {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(p) => std::fs::write(p, body).map_err(|e| format!("{}: {e}", p.display())),
    }
}

pub fn run_solve(args: &SolveArgs) -> i32 {
    let LoadedProblem { problem, defaults } = match problem_io::load_problem(&args.problem) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    let c = args.c.or(defaults.c).unwrap_or(1.0);
    let tol = args.tol.or(defaults.tol).unwrap_or(1e-10);
    let max_iter = args.max_iter.or(defaults.max_iter).unwrap_or(100);
    let formulation = match args.formulation {
        Some(FormulationArg::Direction) => Formulation::Direction,
        Some(FormulationArg::Fullstep) => Formulation::FullStep,
        Some(FormulationArg::Activeset) => Formulation::ActiveSet,
        None => default_formulation(&problem),
    };
    let tie_rule = match args.tie {
        TieArg::Zero => TieRule::PreferZero,
        TieArg::One => TieRule::PreferOne,
    };

    let x0 = match read_start_vector(&args.x0, problem.primal_dim(), "--x0") {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    let lambda0 = match read_start_vector(&args.lambda0, problem.dual_dim(), "--lambda0") {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };

    let cfg = NewtonConfig {
        c,
        tol,
        max_iter,
        tie_rule,
        formulation,
        divergence_factor: 1e6,
        warm_start_steps: args.warm_start,
    };
    let start = PrimalDual::new(x0, lambda0);
    let report = match newton::solve(&problem, &start, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };

    let p_run = match problem.with_penalty(c) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    let kkt = match p_run.kkt_residuals(report.final_point()) {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };

    let ctx = ReportContext {
        report: &report,
        n: problem.primal_dim(),
        m: problem.dual_dim(),
        c,
        tol,
        formulation,
        tie_rule,
        warm_start_steps: args.warm_start,
        kkt,
    };
    let body = if args.output.as_deref().and_then(|p| p.extension()) == Some("json".as_ref()) {
        report::render_json(&ctx)
    } else {
        report::render_text(&ctx)
    };
    if let Err(e) = emit(args.output.as_deref(), &body) {
        eprintln!("error: {e}");
        return EXIT_INPUT_ERROR;
    }
    status_exit(report.status)
}

/// The cross-check penalties of the certification: a pair solving the
/// optimality system at one penalty must solve it at every other.
pub const CHECK_PENALTIES: [f64; 3] = [0.5, 1.0, 10.0];

pub fn run_check(args: &CheckArgs) -> i32 {
    let LoadedProblem { problem, .. } = match problem_io::load_problem(&args.problem) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    let p = match problem.with_penalty(args.c) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    let x = match problem_io::read_vector_file(&args.x) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    let lambda = match problem_io::read_vector_file(&args.lambda) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    if x.len() != p.primal_dim() || lambda.len() != p.dual_dim() {
        eprintln!(
            "error: candidate has dimensions ({}, {}), problem needs ({}, {})",
            x.len(),
            lambda.len(),
            p.primal_dim(),
            p.dual_dim()
        );
        return EXIT_INPUT_ERROR;
    }
    let pt = PrimalDual::new(x, lambda);
    let (stat, feas) = match p.kkt_residuals(&pt) {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    println!("kkt_stationarity {stat:.16e}");
    println!("kkt_feasibility {feas:.16e}");
    let mut worst = stat.max(feas);
    for cc in CHECK_PENALTIES {
        let r = problem
            .with_penalty(cc)
            .and_then(|pc| pc.residual_inf_norm(&pt));
        match r {
            Ok(r) => {
                println!("residual_c{cc} {r:.16e}");
                worst = worst.max(r);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INPUT_ERROR;
            }
        }
    }
    let ok = worst <= args.tol;
    println!("certified {ok} tol {:.16e}", args.tol);
    if ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part.is_empty() {
            continue;
        }
        let (a, b) = part
            .split_once('x')
            .ok_or_else(|| format!("size {part:?} is not of the form NxM"))?;
        let n: usize = a.parse().map_err(|_| format!("bad size {part:?}"))?;
        let m: usize = b.parse().map_err(|_| format!("bad size {part:?}"))?;
        if n == 0 || m == 0 {
            return Err(format!("size {part:?} must be positive"));
        }
        out.push((n, m));
    }
    if out.is_empty() {
        return Err("empty sizes list".into());
    }
    Ok(out)
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part.is_empty() {
            continue;
        }
        out.push(part.parse().map_err(|_| format!("bad seed {part:?}"))?);
    }
    if out.is_empty() {
        return Err("empty seeds list".into());
    }
    Ok(out)
}

/// Solve one bench instance and compare against the matching oracle.
/// Returns the table row and whether the agreement threshold held.
fn bench_instance(inst: &bench::Instance, suite: Suite) -> (BenchRow, bool) {
    let n = inst.problem.primal_dim();
    let m = inst.problem.dual_dim();
    let clock = Instant::now();
    let cfg = NewtonConfig {
        warm_start_steps: 10,
        ..NewtonConfig::default()
    };
    let solved = newton::solve(&inst.problem, &inst.start, &cfg);
    let wall = clock.elapsed().as_secs_f64();

    let (iterations, final_residual, last_ratio, x_newton) = match &solved {
        Ok(r) if r.status == SolveStatus::Converged => (
            r.iterations,
            r.final_residual(),
            r.ratios.last().copied(),
            Some(r.final_point().x.clone()),
        ),
        Ok(r) => (r.iterations, r.final_residual(), r.ratios.last().copied(), None),
        Err(_) => (0, f64::NAN, None, None),
    };

    let x_oracle = match suite {
        Suite::Toy => {
            let grid = GridSpec::new(vec![-4.0; n], vec![4.0; n], 81);
            oracle::brute_force_kkt(&inst.problem, &grid).ok().map(|pd| pd.x)
        }
        _ => {
            let ocfg = OracleConfig {
                tol: 1e-10,
                ..OracleConfig::default()
            };
            oracle::alm_first_order(&inst.problem, &inst.start, &ocfg)
                .ok()
                .filter(|r| r.status == SolveStatus::Converged)
                .map(|r| r.final_point().x.clone())
        }
    };

    let (agreement, ok) = match (&x_newton, &x_oracle) {
        (Some(xn), Some(xo)) => {
            let err = inf_norm(&(xn - xo)) / (1.0 + inf_norm(xo));
            (err, err <= BENCH_AGREEMENT_TOL)
        }
        _ => (f64::INFINITY, false),
    };

    (
        BenchRow {
            id: inst.id.clone(),
            n,
            m,
            iterations,
            final_residual,
            last_ratio,
            agreement_error: agreement,
            wall_seconds: wall,
        },
        ok,
    )
}

pub fn run_bench(args: &BenchArgs) -> i32 {
    let sizes = match parse_sizes(&args.sizes) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    let seeds = match parse_seeds(&args.seeds) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };

    let instances = bench::instances(args.suite, &sizes, &seeds);
    let mut rows = Vec::with_capacity(instances.len());
    let mut all_ok = true;
    for inst in &instances {
        let (row, ok) = bench_instance(inst, args.suite);
        all_ok &= ok;
        rows.push(row);
    }
    let table = report::render_bench_table(&rows);
    if let Err(e) = emit(args.output.as_deref(), &table) {
        eprintln!("error: {e}");
        return EXIT_INPUT_ERROR;
    }
    if all_ok {
        EXIT_OK
    } else {
        EXIT_BENCH_DISAGREEMENT
    }
}
