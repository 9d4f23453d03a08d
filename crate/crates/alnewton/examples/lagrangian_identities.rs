//! The augmented Lagrangian is differentiable even though the problem is
//! not: this example checks its analytic gradients against finite
//! differences, the gradient identity linking the two partial gradients,
//! and the penalty independence of the optimality certificate.
//!
//! ```bash
//! cargo run --release -p alnewton --example lagrangian_identities
//! ```

use alnewton::lagrangian::{PrimalDual, Problem, QuadraticObjective};
use alnewton::linalg::LinearMap;
use alnewton::prox::ProxFunction;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

fn main() {
    // min 0.5 x^T A x - b^T x + |E x|_1 on R^3 with two coupling rows
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0]);
    let b = DVector::from_vec(vec![1.0, -0.5, 0.8]);
    let e = DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 0.0, 1.0, 1.0]);
    let p = Problem::new(
        Arc::new(QuadraticObjective::new(a, b).unwrap()),
        LinearMap::Dense(e),
        ProxFunction::l1(0.7, 2).unwrap(),
        1.0,
    )
    .unwrap();

    let pt = PrimalDual::new(
        DVector::from_vec(vec![0.4, -0.3, 0.9]),
        DVector::from_vec(vec![0.2, -0.6]),
    );

    println!("L_c(x, lambda) = {:.6}", p.lagrangian_value(&pt).unwrap());

    let gx = p.lagrangian_grad_x(&pt).unwrap();
    let gl = p.lagrangian_grad_lambda(&pt).unwrap();
    println!("grad_x  = {:?}", gx.as_slice());
    println!("grad_l  = {:?}", gl.as_slice());

    // central finite differences of the value function
    let h = 1e-6;
    let fd_x = DVector::from_fn(3, |j, _| {
        let mut up = pt.clone();
        let mut dn = pt.clone();
        up.x[j] += h;
        dn.x[j] -= h;
        (p.lagrangian_value(&up).unwrap() - p.lagrangian_value(&dn).unwrap()) / (2.0 * h)
    });
    println!("finite-difference gradient error in x: {:.3e}", (&gx - fd_x).norm());

    // D_x L = grad f + E^T (lambda + c D_lambda L), everywhere
    println!("gradient identity gap: {:.3e}", p.grad_identity_gap(&pt).unwrap());

    // an optimal pair certifies under every penalty; build one by choosing
    // b so that stationarity holds at a hand-picked (x*, lambda*)
    let x_star = DVector::from_vec(vec![0.5, 0.0]);
    let lambda_star = DVector::from_vec(vec![0.7, 0.1]); // in d|  .|_1 at E x* = (0.5, 0)
    let a2 = DMatrix::from_row_slice(2, 2, &[1.2, 0.2, 0.2, 0.9]);
    let b2 = &a2 * &x_star + &lambda_star;
    let p2 = Problem::new(
        Arc::new(QuadraticObjective::new(a2, b2).unwrap()),
        LinearMap::identity(2),
        ProxFunction::l1(0.7, 2).unwrap(),
        1.0,
    )
    .unwrap();
    let star = PrimalDual::new(x_star, lambda_star);
    println!("\nstationarity residual of a constructed optimal pair across penalties:");
    for c in [0.5, 1.0, 10.0] {
        let pc = p2.with_penalty(c).unwrap();
        let (s, f) = pc.kkt_residuals(&star).unwrap();
        println!(
            "  c = {c:4}: ||residual||_inf = {:.3e}, kkt = ({s:.3e}, {f:.3e})",
            pc.residual_inf_norm(&star).unwrap()
        );
    }
    println!(
        "multiplier map fixes lambda*: |Psi(x*, l*) - l*| = {:.3e}",
        (p2.multiplier_map(&star).unwrap() - &star.lambda).amax()
    );
}
