//! One Newton step, three equivalent linear systems: the direction solve
//! with the full saddle-point approximation, the full-step system for the
//! next iterate, and the reduced active-set solve. They agree to
//! round-off at every iterate.
//!
//! ```bash
//! cargo run --release -p alnewton --example formulations
//! ```

use alnewton::bench;
use alnewton::lagrangian::PrimalDual;
use alnewton::linalg::inf_norm;
use alnewton::newton::{
    active_set_step_l1, assemble_lna, full_step_update, newton_direction,
};
use alnewton::prox::TieRule;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let inst = bench::qp_l1(12, 8, 3);
    let p = &inst.problem;
    let n = p.primal_dim();
    let m = p.dual_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    println!("instance {} (n = {n}, m = {m})\n", inst.id);
    println!("{:<28} {:>14} {:>14}", "iterate", "dir vs full", "dir vs active");
    for k in 0..6 {
        let pt = PrimalDual::new(
            DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0)),
            DVector::from_fn(m, |_, _| rng.random_range(-2.0..2.0)),
        );
        let z = p.shifted_point(&pt).unwrap();
        let g = p.phi().jacobian_element(p.penalty(), &z, TieRule::PreferZero).unwrap();

        let lna = assemble_lna(p, &pt, &g).unwrap();
        let rhs = -p.residual(&pt).unwrap();
        let d = newton_direction(&lna, &rhs).unwrap();
        let direction_next = PrimalDual::new(
            &pt.x + d.rows(0, n).into_owned(),
            &pt.lambda + d.rows(n, m).into_owned(),
        );

        let full_next = full_step_update(p, &pt, &g).unwrap();
        let active_next = active_set_step_l1(p, &pt, &g).unwrap();

        let d_full = inf_norm(&(&direction_next.x - &full_next.x))
            .max(inf_norm(&(&direction_next.lambda - &full_next.lambda)));
        let d_active = inf_norm(&(&direction_next.x - &active_next.x))
            .max(inf_norm(&(&direction_next.lambda - &active_next.lambda)));
        println!(
            "random point {k} (|o| = {:>2})  {d_full:14.3e} {d_active:14.3e}",
            g.zero_set().len()
        );
    }

    println!("\nthe active-set solve only factors an (n + |o|) system instead of (n + m),");
    println!("which is why it is the default formulation.");
}
