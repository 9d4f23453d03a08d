//! Property suites for the augmented Lagrangian: gradient correctness on
//! assorted problem shapes, the multiplier-form characterizations, the
//! penalty-free nature of stationarity, and saddle-point behaviour at a
//! computed solution.

mod common;

use alnewton::lagrangian::{PrimalDual, Problem, QuadraticObjective};
use alnewton::linalg::{inf_norm, LinearMap};
use alnewton::newton::{self, NewtonConfig, SolveStatus};
use alnewton::prox::ProxFunction;
use common::{rng, uniform_vec};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::sync::Arc;

#[test]
fn gradients_match_finite_differences_on_assorted_shapes() {
    let mut r = rng(21);
    for idx in 0..40usize {
        let p = common::random_small_problem(&mut r, idx);
        for _ in 0..3 {
            let pt = common::sample_point_off_kinks(&mut r, &p);
            let gx = p.lagrangian_grad_x(&pt).unwrap();
            let gl = p.lagrangian_grad_lambda(&pt).unwrap();
            let fx = common::fd_grad_x(&p, &pt, 1e-6);
            let fl = common::fd_grad_lambda(&p, &pt, 1e-6);
            assert!((&gx - &fx).norm() <= 1e-6 * (1.0 + gx.norm()));
            assert!((&gl - &fl).norm() <= 1e-6 * (1.0 + gl.norm()));
        }
    }
}

#[test]
fn gradient_identity_holds_at_machine_level_for_every_penalty() {
    let mut r = rng(22);
    let n = 7;
    let m = 4;
    let a0 = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
    let a = &a0 * a0.transpose() + DMatrix::identity(n, n);
    let b = uniform_vec(&mut r, n, -1.0, 1.0);
    let e = DMatrix::from_fn(m, n, |_, _| r.random_range(-1.0..1.0));
    for c in [0.1, 1.0, 100.0] {
        let p = Problem::new(
            Arc::new(QuadraticObjective::new(a.clone(), b.clone()).unwrap()),
            LinearMap::Dense(e.clone()),
            ProxFunction::l1(0.7, m).unwrap(),
            c,
        )
        .unwrap();
        for _ in 0..50 {
            let pt = PrimalDual::new(
                uniform_vec(&mut r, n, -2.0, 2.0),
                uniform_vec(&mut r, m, -2.0, 2.0),
            );
            let gap = p.grad_identity_gap(&pt).unwrap();
            let gx = p.lagrangian_grad_x(&pt).unwrap();
            assert!(gap <= 1e-12 * (1.0 + gx.norm()), "gap {gap:.3e} at c {c}");
        }
    }
}

/// Build a problem whose optimality pair is known exactly: pick the pair
/// first, then choose the linear term of the quadratic objective so that
/// stationarity holds by construction.
fn problem_with_known_solution(
    r: &mut rand_chacha::ChaCha8Rng,
    l1: bool,
    n: usize,
) -> (Problem, PrimalDual) {
    let a0 = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0)) / (n as f64).sqrt();
    let a = &a0 * a0.transpose() + DMatrix::identity(n, n) * 0.5;
    let (phi, x_star, lambda_star) = if l1 {
        let alpha = r.random_range(0.4..1.5);
        let (z, l) = common::l1_subgradient_pair(r, alpha, n);
        (ProxFunction::l1(alpha, n).unwrap(), z, l)
    } else {
        let lo = DVector::from_element(n, -1.0);
        let hi = DVector::from_element(n, 1.0);
        let (z, l) = common::box_subgradient_pair(r, &lo, &hi);
        (ProxFunction::box_indicator(lo, hi).unwrap(), z, l)
    };
    // grad f(x*) + lambda* = 0 with E = I: set b = A x* + lambda*
    let b = &a * &x_star + &lambda_star;
    let p = Problem::new(
        Arc::new(QuadraticObjective::new(a, b).unwrap()),
        LinearMap::identity(n),
        phi,
        1.0,
    )
    .unwrap();
    (p, PrimalDual::new(x_star, lambda_star))
}

#[test]
fn certified_pairs_solve_the_stationarity_system_at_every_penalty() {
    let mut r = rng(23);
    for trial in 0..40usize {
        let (p, star) = problem_with_known_solution(&mut r, trial % 2 == 0, 2 + trial % 6);
        let (s, f) = p.kkt_residuals(&star).unwrap();
        assert!(s <= 1e-12 && f <= 1e-12, "construction failed: ({s:.3e}, {f:.3e})");
        // one penalty certifying implies every penalty certifying
        for c in [0.5, 1.0, 10.0] {
            let pc = p.with_penalty(c).unwrap();
            assert!(
                pc.residual_inf_norm(&star).unwrap() <= 1e-10,
                "stationarity lost at c = {c}"
            );
            // and the multiplier map fixes lambda
            let fixed = pc.multiplier_map(&star).unwrap();
            assert!(inf_norm(&(&fixed - &star.lambda)) <= 1e-10);
        }
        // conversely, a perturbed pair fails both characterizations
        let mut off = star.clone();
        off.x[0] += 0.25;
        let (s, f) = p.kkt_residuals(&off).unwrap();
        assert!(s.max(f) > 1e-3);
        assert!(p.residual_inf_norm(&off).unwrap() > 1e-3);
    }
}

#[test]
fn multiplier_map_agrees_with_the_envelope_gradient_route() {
    // lambda + c D_lambda L equals the envelope gradient at the shifted
    // point; two code paths, one value
    let mut r = rng(24);
    let mut checked = 0usize;
    let mut idx = 0usize;
    while checked < 1000 {
        let p = common::random_small_problem(&mut r, idx);
        idx += 1;
        for _ in 0..10 {
            let pt = PrimalDual::new(
                uniform_vec(&mut r, p.primal_dim(), -2.0, 2.0),
                uniform_vec(&mut r, p.dual_dim(), -2.0, 2.0),
            );
            let route1 = p.multiplier_map(&pt).unwrap();
            let z = p.shifted_point(&pt).unwrap();
            let route2 = p.phi().moreau_grad(p.penalty(), &z).unwrap();
            assert!(inf_norm(&(&route1 - &route2)) <= 1e-12 * (1.0 + inf_norm(&route2)));
            checked += 1;
        }
    }
}

#[test]
fn computed_solutions_are_saddle_points() {
    let mut r = rng(25);
    let inst = alnewton::bench::qp_box(25, 12, 9);
    let report = newton::solve(&inst.problem, &inst.start, &NewtonConfig::default()).unwrap();
    assert_eq!(report.status, SolveStatus::Converged);
    let star = report.final_point();
    let p = inst.problem.clone();
    let l_star = p.lagrangian_value(star).unwrap();
    for _ in 0..200 {
        let dx = uniform_vec(&mut r, p.primal_dim(), -0.5, 0.5);
        let dl = uniform_vec(&mut r, p.dual_dim(), -0.5, 0.5);
        let in_x = PrimalDual::new(&star.x + dx, star.lambda.clone());
        let in_l = PrimalDual::new(star.x.clone(), &star.lambda + dl);
        assert!(
            p.lagrangian_value(&in_l).unwrap() <= l_star + 1e-10,
            "not a maximizer over the multiplier"
        );
        assert!(
            p.lagrangian_value(&in_x).unwrap() >= l_star - 1e-10,
            "not a minimizer over the primal"
        );
    }
}

#[test]
fn lagrangian_is_midpoint_convex_in_x_and_concave_in_lambda() {
    let mut r = rng(26);
    for idx in 0..25usize {
        let p = common::random_small_problem(&mut r, idx);
        for _ in 0..8 {
            let lambda = uniform_vec(&mut r, p.dual_dim(), -2.0, 2.0);
            let x1 = uniform_vec(&mut r, p.primal_dim(), -2.0, 2.0);
            let x2 = uniform_vec(&mut r, p.primal_dim(), -2.0, 2.0);
            let mid = PrimalDual::new((&x1 + &x2) / 2.0, lambda.clone());
            let a = p.lagrangian_value(&PrimalDual::new(x1, lambda.clone())).unwrap();
            let b = p.lagrangian_value(&PrimalDual::new(x2, lambda.clone())).unwrap();
            let m = p.lagrangian_value(&mid).unwrap();
            assert!(m <= 0.5 * (a + b) + 1e-10 * (1.0 + a.abs() + b.abs()));

            let x = uniform_vec(&mut r, p.primal_dim(), -2.0, 2.0);
            let l1v = uniform_vec(&mut r, p.dual_dim(), -2.0, 2.0);
            let l2v = uniform_vec(&mut r, p.dual_dim(), -2.0, 2.0);
            let mid = PrimalDual::new(x.clone(), (&l1v + &l2v) / 2.0);
            let a = p.lagrangian_value(&PrimalDual::new(x.clone(), l1v)).unwrap();
            let b = p.lagrangian_value(&PrimalDual::new(x, l2v)).unwrap();
            let m = p.lagrangian_value(&mid).unwrap();
            assert!(m >= 0.5 * (a + b) - 1e-10 * (1.0 + a.abs() + b.abs()));
        }
    }
}

#[test]
fn lagrangian_is_finite_everywhere_even_outside_the_domain() {
    // the envelope smooths the indicator: L_c is finite at infeasible x
    let q = QuadraticObjective::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
    let p = Problem::new(
        Arc::new(q),
        LinearMap::identity(2),
        ProxFunction::box_indicator(DVector::zeros(2), DVector::from_element(2, 1.0)).unwrap(),
        2.0,
    )
    .unwrap();
    let pt = PrimalDual::new(DVector::from_vec(vec![5.0, -7.0]), DVector::from_vec(vec![1.0, 3.0]));
    let v = p.lagrangian_value(&pt).unwrap();
    assert!(v.is_finite());
    assert!(p.objective(&pt.x).unwrap().is_infinite());
}
