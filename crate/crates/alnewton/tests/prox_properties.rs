//! Property suites for the prox module: the textbook facts about Moreau
//! envelopes and proximity operators, checked on randomized inputs.

mod common;

use alnewton::prox::{ProxFunction, TieRule};
use common::conjugate_envelope_direct;
use nalgebra::DVector;
use proptest::prelude::*;

fn vec_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 1..=max_len)
}

fn phi_for(kind: bool, dim: usize, alpha: f64, spread: f64) -> ProxFunction {
    if kind {
        ProxFunction::l1(alpha, dim).unwrap()
    } else {
        // box centered at the origin with per-instance half width
        ProxFunction::box_indicator(
            DVector::from_element(dim, -spread),
            DVector::from_element(dim, spread),
        )
        .unwrap()
    }
}

proptest! {
    #[test]
    fn prox_is_firmly_nonexpansive(
        z in vec_strategy(6),
        seed in 0..2usize,
        c in 0.3..20.0f64,
        alpha in 0.2..2.0f64,
        spread in 0.2..2.0f64,
    ) {
        let m = z.len();
        let phi = phi_for(seed == 0, m, alpha, spread);
        let z = DVector::from_vec(z);
        let w = -&z + DVector::from_element(m, 0.37);
        let pz = phi.prox(c, &z).unwrap();
        let pw = phi.prox(c, &w).unwrap();
        let d = &pz - &pw;
        prop_assert!(d.norm_squared() <= d.dot(&(&z - &w)) + 1e-12);
    }

    #[test]
    fn envelope_never_exceeds_the_function(
        z in vec_strategy(6),
        seed in 0..2usize,
        c in 0.3..20.0f64,
        alpha in 0.2..2.0f64,
        spread in 0.2..2.0f64,
    ) {
        let m = z.len();
        let phi = phi_for(seed == 0, m, alpha, spread);
        let z = DVector::from_vec(z);
        let env = phi.moreau(c, &z).unwrap();
        prop_assert!(env >= -1e-15);
        if let Some(v) = phi.eval(&z).unwrap().finite() {
            prop_assert!(env <= v + 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn envelope_grows_toward_the_function(
        z in vec_strategy(6),
        seed in 0..2usize,
        alpha in 0.2..2.0f64,
        spread in 0.2..2.0f64,
    ) {
        // monotone pointwise limit in c along 1, 10, 100, 1000, taken at
        // points where phi is finite
        let m = z.len();
        let phi = phi_for(seed == 0, m, alpha, spread);
        let z = DVector::from_vec(z);
        let z = phi.prox(1.0, &z).unwrap(); // pull into the domain
        let value = phi.eval(&z).unwrap().finite().unwrap();
        // the limit is pointwise with no rate, so only the monotone
        // approach from below is asserted
        let mut prev = f64::NEG_INFINITY;
        for c in [1.0, 10.0, 100.0, 1000.0] {
            let env = phi.moreau(c, &z).unwrap();
            prop_assert!(env + 1e-12 >= prev, "envelope not monotone in c");
            prop_assert!(env <= value + 1e-12 * (1.0 + value.abs()));
            prev = env;
        }
    }

    #[test]
    fn envelope_gradient_is_c_lipschitz(
        z in vec_strategy(6),
        w in vec_strategy(6),
        seed in 0..2usize,
        c in 0.3..20.0f64,
        alpha in 0.2..2.0f64,
        spread in 0.2..2.0f64,
    ) {
        let m = z.len().min(w.len());
        let phi = phi_for(seed == 0, m, alpha, spread);
        let z = DVector::from_vec(z[..m].to_vec());
        let w = DVector::from_vec(w[..m].to_vec());
        let gz = phi.moreau_grad(c, &z).unwrap();
        let gw = phi.moreau_grad(c, &w).unwrap();
        prop_assert!((gz - gw).norm() <= c * (&z - &w).norm() * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn moreau_decomposition_reconstructs_the_point(
        z in vec_strategy(6),
        seed in 0..2usize,
        c in 0.3..20.0f64,
        alpha in 0.2..2.0f64,
        spread in 0.2..2.0f64,
    ) {
        // prox(z) + (1/c) prox_conjugate(z) = z, and the envelope identity
        // against the independently coded conjugate envelope
        let m = z.len();
        let phi = phi_for(seed == 0, m, alpha, spread);
        let z = DVector::from_vec(z);
        let rebuilt = phi.prox(c, &z).unwrap() + phi.prox_conjugate(c, &z).unwrap() / c;
        prop_assert!((rebuilt - &z).amax() <= 1e-12);

        let ident = phi.moreau(c, &z).unwrap() + conjugate_envelope_direct(&phi, c, &z)
            - 0.5 * c * z.norm_squared();
        prop_assert!(ident.abs() <= 1e-11 * (1.0 + 0.5 * c * z.norm_squared()));
    }

    #[test]
    fn jacobian_elements_are_binary_diagonal_contractions(
        z in vec_strategy(6),
        seed in 0..2usize,
        c in 0.3..20.0f64,
        alpha in 0.2..2.0f64,
        spread in 0.2..2.0f64,
        prefer_one in proptest::bool::ANY,
    ) {
        let m = z.len();
        let phi = phi_for(seed == 0, m, alpha, spread);
        let z = DVector::from_vec(z);
        let tie = if prefer_one { TieRule::PreferOne } else { TieRule::PreferZero };
        let g = phi.jacobian_element(c, &z, tie).unwrap();
        prop_assert_eq!(g.dim(), m);
        // diagonal entries in {0, 1}: symmetric positive semidefinite with
        // norm at most one, and the two index sets partition everything
        for &d in g.diag() {
            prop_assert!(d == 0.0 || d == 1.0);
        }
        prop_assert_eq!(g.zero_set().len() + g.one_set().len(), m);
    }
}

/// The subgradient characterizations of the envelope: for analytic pairs
/// `lambda in d(phi)(z)` both the prox fixed point and the envelope value
/// identity hold, and both fail off the subdifferential.
#[test]
fn subgradient_characterizations_hold_and_discriminate() {
    let mut r = common::rng(11);
    for trial in 0..300usize {
        let m = 1 + trial % 5;
        let alpha = 0.5 + (trial % 7) as f64 * 0.2;
        let (phi, mut z, mut lambda) = if trial % 2 == 0 {
            let (z, l) = common::l1_subgradient_pair(&mut r, alpha, m);
            (ProxFunction::l1(alpha, m).unwrap(), z, l)
        } else {
            let lo = DVector::from_element(m, -1.0);
            let hi = DVector::from_element(m, 1.0);
            let (z, l) = common::box_subgradient_pair(&mut r, &lo, &hi);
            (ProxFunction::box_indicator(lo, hi).unwrap(), z, l)
        };
        // keep component 0 in the strict-interior case of its kind, where
        // the subdifferential is smallest
        if trial % 2 == 0 {
            z[0] = 0.0;
            lambda[0] = 0.3 * alpha;
        } else {
            z[0] = 0.0;
            lambda[0] = 0.0;
        }

        for c in [0.5, 1.0, 10.0] {
            let shifted = &z + &lambda / c;
            assert!((&z - phi.prox(c, &shifted).unwrap()).amax() <= 1e-12);
            let phi_z = phi.eval(&z).unwrap().finite().unwrap();
            let via_env = phi.moreau(c, &shifted).unwrap() - lambda.norm_squared() / (2.0 * c);
            assert!((via_env - phi_z).abs() <= 1e-12);
        }

        // stepping outside the subdifferential at the interior component
        // breaks the fixed point
        let mut bad = lambda.clone();
        bad[0] += 3.0 * alpha.max(1.0);
        let shifted = &z + &bad / 1.0;
        assert!(
            (&z - phi.prox(1.0, &shifted).unwrap()).amax() > 1e-6,
            "non-subgradient accepted (trial {trial})"
        );
    }
}
