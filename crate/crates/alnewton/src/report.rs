//! Report rendering: a diffable key-value text format with per-iteration
//! records, a JSON variant selected by output extension, and the bench
//! table.
//!
//! Nothing time- or environment-dependent is written, so identical runs
//! produce byte-identical report bodies.

use crate::newton::{Formulation, SolveReport};
use crate::prox::TieRule;
use serde::Serialize;

/// Everything a rendered solve report carries beyond the raw history.
pub struct ReportContext<'a> {
    pub report: &'a SolveReport,
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub tol: f64,
    pub formulation: Formulation,
    pub tie_rule: TieRule,
    pub warm_start_steps: usize,
    /// `(stationarity, feasibility)` residuals at the final point.
    pub kkt: (f64, f64),
}

fn tie_name(t: TieRule) -> &'static str {
    match t {
        TieRule::PreferZero => "zero",
        TieRule::PreferOne => "one",
    }
}

fn fnum(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_text(ctx: &ReportContext) -> String {
    let r = ctx.report;
    let mut out = String::new();
    out.push_str(&format!("status {}\n", r.status));
    out.push_str(&format!("iterations {}\n", r.iterations));
    out.push_str(&format!("n {}\n", ctx.n));
    out.push_str(&format!("m {}\n", ctx.m));
    out.push_str(&format!("c {}\n", fnum(ctx.c)));
    out.push_str(&format!("tol {}\n", fnum(ctx.tol)));
    out.push_str(&format!("formulation {}\n", ctx.formulation));
    out.push_str(&format!("tie {}\n", tie_name(ctx.tie_rule)));
    out.push_str(&format!("warm_start_steps {}\n", ctx.warm_start_steps));
    out.push_str(&format!("kkt_stationarity {}\n", fnum(ctx.kkt.0)));
    out.push_str(&format!("kkt_feasibility {}\n", fnum(ctx.kkt.1)));
    for k in 0..r.residual_norms.len() {
        let ratio = if k == 0 {
            "-".to_string()
        } else {
            fnum(r.ratios[k - 1])
        };
        let active = if k < r.active_set_history.len() {
            r.active_set_history[k].len().to_string()
        } else {
            "-".to_string()
        };
        out.push_str(&format!(
            "iter {k} residual {} ratio {ratio} active {active}\n",
            fnum(r.residual_norms[k])
        ));
    }
    let pt = r.final_point();
    let xs: Vec<String> = pt.x.iter().map(|v| fnum(*v)).collect();
    out.push_str(&format!("x {}\n", xs.join(" ")));
    let ls: Vec<String> = pt.lambda.iter().map(|v| fnum(*v)).collect();
    out.push_str(&format!("lambda {}\n", ls.join(" ")));
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    status: crate::newton::SolveStatus,
    iterations: usize,
    n: usize,
    m: usize,
    c: f64,
    tol: f64,
    formulation: Formulation,
    tie: &'static str,
    warm_start_steps: usize,
    kkt_stationarity: f64,
    kkt_feasibility: f64,
    residual_norms: &'a [f64],
    ratios: &'a [f64],
    active_set_sizes: Vec<usize>,
    x: Vec<f64>,
    lambda: Vec<f64>,
}

pub fn render_json(ctx: &ReportContext) -> String {
    let r = ctx.report;
    let pt = r.final_point();
    let doc = JsonReport {
        status: r.status,
        iterations: r.iterations,
        n: ctx.n,
        m: ctx.m,
        c: ctx.c,
        tol: ctx.tol,
        formulation: ctx.formulation,
        tie: tie_name(ctx.tie_rule),
        warm_start_steps: ctx.warm_start_steps,
        kkt_stationarity: ctx.kkt.0,
        kkt_feasibility: ctx.kkt.1,
        residual_norms: &r.residual_norms,
        ratios: &r.ratios,
        active_set_sizes: r.active_set_history.iter().map(|s| s.len()).collect(),
        x: pt.x.iter().cloned().collect(),
        lambda: pt.lambda.iter().cloned().collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// One row of the bench table.
pub struct BenchRow {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub iterations: usize,
    pub final_residual: f64,
    pub last_ratio: Option<f64>,
    pub agreement_error: f64,
    pub wall_seconds: f64,
}

pub fn render_bench_table(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "instance\tn\tm\titerations\tfinal_residual\tlast_ratio\tagreement_error\twall_seconds\n",
    );
    for r in rows {
        let ratio = r
            .last_ratio
            .map(|v| format!("{v:.6e}"))
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.6e}\t{}\t{:.6e}\t{:.3}\n",
            r.id, r.n, r.m, r.iterations, r.final_residual, ratio, r.agreement_error, r.wall_seconds
        ));
    }
    out
}
