//! The on-disk problem format: write a problem description plus its
//! matrix files, load them back, solve, and certify — the same pipeline
//! the `solve`/`check` subcommands drive.
//!
//! ```bash
//! cargo run --release -p alnewton --example problem_files
//! ```

use alnewton::lagrangian::PrimalDual;
use alnewton::newton::{self, NewtonConfig};
use alnewton::problem_io::{self, write_dense_matrix_file};
use nalgebra::DMatrix;

fn main() {
    let dir = std::env::temp_dir().join("alnewton-problem-files-example");
    std::fs::create_dir_all(&dir).unwrap();

    // a 2-variable quadratic with one bilateral constraint row
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    write_dense_matrix_file(&dir.join("a.txt"), &a).unwrap();
    let e = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
    write_dense_matrix_file(&dir.join("e.txt"), &e).unwrap();

    let problem_toml = r#"# minimize 0.5 x^T A x - b^T x  subject to  x1 + x2 <= 0.5
E_path = "e.txt"

[objective]
kind = "quadratic"
A_path = "a.txt"
b = [1.0, 1.0]

[phi]
kind = "box"
lower = [-inf]
upper = [0.5]

[defaults]
c = 1.0
tol = 1e-10
max_iter = 50
"#;
    let path = dir.join("problem.toml");
    std::fs::write(&path, problem_toml).unwrap();
    println!("wrote {}:\n{problem_toml}", path.display());

    let loaded = problem_io::load_problem(&path).unwrap();
    let p = &loaded.problem;
    println!(
        "loaded: n = {}, m = {}, defaults c = {:?}, tol = {:?}, max_iter = {:?}",
        p.primal_dim(),
        p.dual_dim(),
        loaded.defaults.c,
        loaded.defaults.tol,
        loaded.defaults.max_iter
    );

    let report = newton::solve(
        p,
        &PrimalDual::zeros(p.primal_dim(), p.dual_dim()),
        &NewtonConfig::default(),
    )
    .unwrap();
    let star = report.final_point();
    println!(
        "\nsolved: {} in {} iterations; x = {:?}, lambda = {:?}",
        report.status,
        report.iterations,
        star.x.as_slice(),
        star.lambda.as_slice()
    );
    let sum = star.x[0] + star.x[1];
    println!("constraint row value x1 + x2 = {sum:.12} (bound 0.5)");
    let (s, f) = p.kkt_residuals(star).unwrap();
    println!("certification residuals: ({s:.3e}, {f:.3e})");
    println!("\nthe binary drives the same path:");
    println!("  alnewton solve --problem {}", path.display());
}
