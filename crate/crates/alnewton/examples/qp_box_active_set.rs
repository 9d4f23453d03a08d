//! A box-constrained quadratic program solved by the primal-dual
//! active-set specialization: watch the active set settle and the
//! iteration terminate finitely with a machine-exact solve.
//!
//! ```bash
//! cargo run --release -p alnewton --example qp_box_active_set
//! ```

use alnewton::bench;
use alnewton::newton::{self, NewtonConfig};

fn main() {
    let inst = bench::qp_box(60, 40, 11);
    let p = &inst.problem;
    println!(
        "instance {} (n = {}, m = {}), solved without warm start",
        inst.id,
        p.primal_dim(),
        p.dual_dim()
    );

    let cfg = NewtonConfig {
        max_iter: 50,
        ..NewtonConfig::default()
    };
    let report = newton::solve(p, &inst.start, &cfg).unwrap();
    println!("status: {} after {} iterations\n", report.status, report.iterations);

    println!("{:>4} {:>14} {:>12} {:>8}", "iter", "residual", "ratio", "|active|");
    for k in 0..report.residual_norms.len() {
        let ratio = if k == 0 {
            "-".to_string()
        } else {
            format!("{:.3e}", report.ratios[k - 1])
        };
        let active = if k < report.active_set_history.len() {
            report.active_set_history[k].len().to_string()
        } else {
            "-".to_string()
        };
        println!(
            "{k:>4} {:>14.6e} {ratio:>12} {active:>8}",
            report.residual_norms[k]
        );
    }

    let star = report.final_point();
    let ex = p.map().matvec(&star.x).unwrap();
    let at_bound = match p.phi() {
        alnewton::ProxFunction::BoxIndicator { lower, upper } => (0..ex.len())
            .filter(|&j| (ex[j] - lower[j]).abs() < 1e-9 || (ex[j] - upper[j]).abs() < 1e-9)
            .count(),
        _ => unreachable!(),
    };
    println!("\nconstraints active at the solution: {at_bound} of {}", ex.len());
    let (s, f) = p.kkt_residuals(star).unwrap();
    println!("optimality residuals: stationarity {s:.3e}, feasibility {f:.3e}");
}
