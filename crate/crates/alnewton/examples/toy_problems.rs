//! The two scalar toys with their full iteration traces: a clamped
//! quadratic and a soft-thresholded one, both with the known solution
//! (x, lambda) = (1, 1), cross-checked by the brute-force verifier.
//!
//! ```bash
//! cargo run --release -p alnewton --example toy_problems
//! ```

use alnewton::bench;
use alnewton::newton::{self, NewtonConfig};
use alnewton::oracle::{self, GridSpec};

fn main() {
    for inst in [bench::toy_box(), bench::toy_l1()] {
        println!("== {} ==", inst.id);
        let report = newton::solve(&inst.problem, &inst.start, &NewtonConfig::default()).unwrap();
        println!("status: {} after {} iterations", report.status, report.iterations);
        for (k, pt) in report.iterates.iter().enumerate() {
            println!(
                "  iter {k}: x = {:+.12}, lambda = {:+.12}, residual = {:.3e}",
                pt.x[0], pt.lambda[0], report.residual_norms[k]
            );
        }

        let grid = GridSpec::new(vec![-3.0], vec![3.0], 61);
        let bf = oracle::brute_force_kkt(&inst.problem, &grid).unwrap();
        println!(
            "brute-force grid verifier: x = {:.9}, lambda = {:.9}",
            bf.x[0], bf.lambda[0]
        );

        let (s, f) = inst.problem.kkt_residuals(report.final_point()).unwrap();
        println!("optimality residuals at the final pair: ({s:.3e}, {f:.3e})\n");
    }
}
