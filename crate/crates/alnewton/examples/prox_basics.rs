//! Proximity operators and Moreau envelopes for the two built-in
//! separable functions, plus the Moreau decomposition and the diagonal
//! limiting-Jacobian selection used by the Newton solver.
//!
//! ```bash
//! cargo run --release -p alnewton --example prox_basics
//! ```

use alnewton::prox::{ProxFunction, TieRule};
use nalgebra::DVector;

fn main() {
    let c = 1.0;
    let z = DVector::from_vec(vec![-2.0, -0.4, 0.0, 0.7, 2.5]);

    let l1 = ProxFunction::l1(1.0, 5).unwrap();
    println!("l1 norm, alpha = 1, c = {c}");
    println!("  z               = {:?}", z.as_slice());
    println!("  prox(z)         = {:?}", l1.prox(c, &z).unwrap().as_slice());
    println!("  envelope(z)     = {:.6}", l1.moreau(c, &z).unwrap());
    println!("  envelope grad   = {:?}", l1.moreau_grad(c, &z).unwrap().as_slice());
    let g = l1.jacobian_element(c, &z, TieRule::PreferZero).unwrap();
    println!("  jacobian diag   = {:?}   (1 = above threshold)", g.diag());

    // Moreau decomposition: prox of the function plus the scaled prox of
    // its conjugate reassemble the point exactly
    let rebuilt = l1.prox(c, &z).unwrap() + l1.prox_conjugate(c, &z).unwrap() / c;
    println!("  decomposition residual = {:.3e}", (rebuilt - &z).amax());

    let spread_box = ProxFunction::box_indicator(
        DVector::from_vec(vec![-1.0, -1.0, 0.0, 0.0, f64::NEG_INFINITY]),
        DVector::from_vec(vec![1.0, 0.5, 0.5, f64::INFINITY, 1.0]),
    )
    .unwrap();
    println!("\nbox indicator with mixed finite/infinite bounds, c = {c}");
    println!("  z               = {:?}", z.as_slice());
    println!("  prox(z) (clamp) = {:?}", spread_box.prox(c, &z).unwrap().as_slice());
    println!("  phi(z)          = {:?}", spread_box.eval(&z).unwrap());
    println!(
        "  envelope(z)     = {:.6}   (half the squared distance to the box, scaled by c)",
        spread_box.moreau(c, &z).unwrap()
    );
    let g = spread_box.jacobian_element(c, &z, TieRule::PreferZero).unwrap();
    println!("  jacobian diag   = {:?}   (1 = strictly inside)", g.diag());

    // the envelope increases toward the function value as c grows
    let inside = DVector::from_vec(vec![0.5, 0.2, 0.3, 1.0, 0.5]);
    println!("\nenvelope of the box at a feasible point for growing c:");
    for c in [1.0, 10.0, 100.0, 1000.0] {
        println!("  c = {c:7}: envelope = {:.3e}", spread_box.moreau(c, &inside).unwrap());
    }
    println!("  function value itself: {:?}", spread_box.eval(&inside).unwrap());
}
