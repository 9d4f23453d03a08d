//! Three independent routes to the same minimizer: the Newton solver,
//! the first-order multiplier method, and (for identity maps)
//! forward-backward splitting.
//!
//! ```bash
//! cargo run --release -p alnewton --example oracle_crosscheck
//! ```

use alnewton::lagrangian::{PrimalDual, Problem, QuadraticObjective};
use alnewton::linalg::{inf_norm, LinearMap};
use alnewton::newton::{self, NewtonConfig};
use alnewton::oracle::{self, OracleConfig};
use alnewton::prox::ProxFunction;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    // lasso-style instance with E = identity so every solver applies
    let n = 120;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m0 = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)) / (n as f64).sqrt();
    let a = &m0 * m0.transpose() + DMatrix::identity(n, n) * 0.3;
    let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let p = Problem::new(
        Arc::new(QuadraticObjective::new(a, b).unwrap()),
        LinearMap::identity(n),
        ProxFunction::l1(0.2, n).unwrap(),
        1.0,
    )
    .unwrap();
    let start = PrimalDual::zeros(n, n);

    let t = Instant::now();
    let newton_rep = newton::solve(
        &p,
        &start,
        &NewtonConfig {
            warm_start_steps: 5,
            ..NewtonConfig::default()
        },
    )
    .unwrap();
    println!(
        "newton:           {} in {:>4} iterations   ({:.1} ms)",
        newton_rep.status,
        newton_rep.iterations,
        t.elapsed().as_secs_f64() * 1e3
    );

    let cfg = OracleConfig {
        tol: 1e-10,
        max_iter: 200_000,
        ..OracleConfig::default()
    };
    let t = Instant::now();
    let alm_rep = oracle::alm_first_order(&p, &start, &cfg).unwrap();
    println!(
        "multiplier method: {} in {:>4} iterations   ({:.1} ms)",
        alm_rep.status,
        alm_rep.iterations,
        t.elapsed().as_secs_f64() * 1e3
    );

    let t = Instant::now();
    let x_fb = oracle::prox_gradient(&p, &DVector::zeros(n), &cfg).unwrap();
    println!(
        "forward-backward:  converged                  ({:.1} ms)",
        t.elapsed().as_secs_f64() * 1e3
    );

    let x_n = &newton_rep.final_point().x;
    let x_a = &alm_rep.final_point().x;
    println!("\nmax coordinate disagreement:");
    println!("  newton vs multiplier method: {:.3e}", inf_norm(&(x_n - x_a)));
    println!("  newton vs forward-backward:  {:.3e}", inf_norm(&(x_n - &x_fb)));
    let nnz = x_n.iter().filter(|v| v.abs() > 1e-9).count();
    println!("\nnonzeros in the solution: {nnz} of {n}");
}
