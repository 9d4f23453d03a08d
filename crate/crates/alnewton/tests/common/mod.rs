//! Shared helpers for the integration suites: independent oracles
//! (finite differences, closed-form conjugate envelopes, a Jacobi
//! eigensolver), analytic subgradient constructions, and a small random
//! problem generator.
#![allow(dead_code)]

use alnewton::lagrangian::{
    PrimalDual, Problem, QuadraticObjective, SeparableExpObjective, SmoothObjective,
};
use alnewton::linalg::{LinearMap, SparseMatrix};
use alnewton::prox::ProxFunction;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.random_range(lo..hi))
}

/// Central finite difference of the augmented Lagrangian in `x`.
pub fn fd_grad_x(p: &Problem, pt: &PrimalDual, h: f64) -> DVector<f64> {
    DVector::from_fn(pt.x.len(), |j, _| {
        let mut up = pt.clone();
        let mut dn = pt.clone();
        up.x[j] += h;
        dn.x[j] -= h;
        (p.lagrangian_value(&up).unwrap() - p.lagrangian_value(&dn).unwrap()) / (2.0 * h)
    })
}

/// Central finite difference of the augmented Lagrangian in `lambda`.
pub fn fd_grad_lambda(p: &Problem, pt: &PrimalDual, h: f64) -> DVector<f64> {
    DVector::from_fn(pt.lambda.len(), |j, _| {
        let mut up = pt.clone();
        let mut dn = pt.clone();
        up.lambda[j] += h;
        dn.lambda[j] -= h;
        (p.lagrangian_value(&up).unwrap() - p.lagrangian_value(&dn).unwrap()) / (2.0 * h)
    })
}

/// Direct closed-form evaluation of the Moreau envelope of the convex
/// conjugate, `(phi*)_{1/c}(c z)`, written independently of the library's
/// Moreau-decomposition code path.
///
/// For the l1 norm the conjugate is the indicator of `[-alpha, alpha]^m`,
/// so the envelope is half the squared distance to that box over `c`. For
/// a box indicator the conjugate is the support function, piecewise
/// linear, and the envelope has three branches per component.
pub fn conjugate_envelope_direct(phi: &ProxFunction, c: f64, z: &DVector<f64>) -> f64 {
    match phi {
        ProxFunction::L1Norm { alpha, .. } => z
            .iter()
            .map(|&zj| {
                let w = c * zj;
                let d = w - w.clamp(-alpha, *alpha);
                d * d / (2.0 * c)
            })
            .sum(),
        ProxFunction::BoxIndicator { lower, upper } => (0..z.len())
            .map(|j| {
                let w = c * z[j];
                let (lo, up) = (lower[j], upper[j]);
                if up.is_finite() && w > c * up {
                    up * w - 0.5 * c * up * up
                } else if lo.is_finite() && w < c * lo {
                    lo * w - 0.5 * c * lo * lo
                } else {
                    w * w / (2.0 * c)
                }
            })
            .sum(),
    }
}

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations;
/// a from-scratch oracle for the diagnostics test.
pub fn jacobi_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..200 {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off < 1e-13 * (1.0 + a.diagonal().amax()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cc = 1.0 / (t * t + 1.0).sqrt();
                let ss = t * cc;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cc * akp - ss * akq;
                    a[(k, q)] = ss * akp + cc * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cc * apk - ss * aqk;
                    a[(q, k)] = ss * apk + cc * aqk;
                }
            }
        }
    }
    a.diagonal().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Sample `z` plus an analytic subgradient `lambda` of the weighted l1
/// norm at `z`: `alpha * sign(z_j)` off zero, anything in
/// `[-alpha, alpha]` at exact zeros.
pub fn l1_subgradient_pair(
    rng: &mut ChaCha8Rng,
    alpha: f64,
    m: usize,
) -> (DVector<f64>, DVector<f64>) {
    let mut z = DVector::zeros(m);
    let mut lambda = DVector::zeros(m);
    for j in 0..m {
        if rng.random_range(0.0..1.0) < 0.3 {
            z[j] = 0.0;
            lambda[j] = rng.random_range(-alpha..alpha);
        } else {
            let v: f64 = rng.random_range(0.1..2.0);
            let s = if rng.random_range(0.0..1.0) < 0.5 { 1.0 } else { -1.0 };
            z[j] = s * v;
            lambda[j] = alpha * s;
        }
    }
    (z, lambda)
}

/// Sample `z` in a finite box plus an analytic normal-cone element:
/// zero strictly inside, nonnegative at the upper bound, nonpositive at
/// the lower bound.
pub fn box_subgradient_pair(
    rng: &mut ChaCha8Rng,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let m = lower.len();
    let mut z = DVector::zeros(m);
    let mut lambda = DVector::zeros(m);
    for j in 0..m {
        let pick = rng.random_range(0.0..1.0);
        if pick < 0.2 {
            z[j] = upper[j];
            lambda[j] = rng.random_range(0.0..2.0);
        } else if pick < 0.4 {
            z[j] = lower[j];
            lambda[j] = rng.random_range(-2.0..0.0);
        } else {
            let t: f64 = rng.random_range(0.05..0.95);
            z[j] = lower[j] + t * (upper[j] - lower[j]);
            lambda[j] = 0.0;
        }
    }
    (z, lambda)
}

/// Kink margin used by every finite-difference test: the envelope is C1
/// everywhere but only piecewise C2, and central differences need the
/// sample to stay off the second-derivative jumps.
pub const KINK_MARGIN: f64 = 1e-3;

/// Distance of `z` to the nearest kink of `prox(c, .)`.
pub fn kink_distance(phi: &ProxFunction, c: f64, z: &DVector<f64>) -> f64 {
    match phi {
        ProxFunction::L1Norm { alpha, .. } => {
            let t = alpha / c;
            z.iter().map(|zj| (zj.abs() - t).abs()).fold(f64::INFINITY, f64::min)
        }
        ProxFunction::BoxIndicator { lower, upper } => (0..z.len())
            .map(|j| {
                let mut d = f64::INFINITY;
                if lower[j].is_finite() {
                    d = d.min((z[j] - lower[j]).abs());
                }
                if upper[j].is_finite() {
                    d = d.min((z[j] - upper[j]).abs());
                }
                d
            })
            .fold(f64::INFINITY, f64::min),
    }
}

/// A random finite box inside [-2, 2] with an occasional unbounded side.
pub fn random_box(rng: &mut ChaCha8Rng, m: usize, allow_infinite: bool) -> ProxFunction {
    let mut lower = DVector::zeros(m);
    let mut upper = DVector::zeros(m);
    for j in 0..m {
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        lower[j] = a.min(b);
        upper[j] = a.max(b);
        if allow_infinite {
            if rng.random_range(0.0..1.0) < 0.1 {
                lower[j] = f64::NEG_INFINITY;
            }
            if rng.random_range(0.0..1.0) < 0.1 {
                upper[j] = f64::INFINITY;
            }
        }
    }
    ProxFunction::box_indicator(lower, upper).unwrap()
}

/// Deterministic assortment of small problems cycling objective kind,
/// map storage and nonsmooth kind.
pub fn random_small_problem(rng: &mut ChaCha8Rng, idx: usize) -> Problem {
    let n = rng.random_range(2..=20);
    let m = if idx % 4 == 2 { n } else { rng.random_range(1..=15) };

    let smooth: Arc<dyn SmoothObjective> = if idx % 3 == 2 {
        let rates = uniform_vec(rng, n, -1.0, 1.0);
        Arc::new(SeparableExpObjective::new(rates, 0.1))
    } else {
        let scale = 1.0 / (n as f64).sqrt();
        let mmat = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0) * scale);
        let a = &mmat * mmat.transpose() + DMatrix::identity(n, n) * 0.1;
        let b = uniform_vec(rng, n, -1.0, 1.0);
        Arc::new(QuadraticObjective::new(a, b).unwrap())
    };

    let e = match idx % 4 {
        2 => LinearMap::identity(n),
        3 => {
            let mut triplets = Vec::new();
            for r in 0..m {
                for ccol in 0..n {
                    if rng.random_range(0.0..1.0) < 0.4 {
                        triplets.push((r, ccol, rng.random_range(-1.0..1.0)));
                    }
                }
                // keep every row nonempty
                if !triplets.iter().any(|t| t.0 == r) {
                    triplets.push((r, rng.random_range(0..n), rng.random_range(0.2..1.0)));
                }
            }
            LinearMap::Sparse(SparseMatrix::from_triplets(m, n, &triplets).unwrap())
        }
        _ => {
            let scale = 1.0 / (n as f64).sqrt();
            LinearMap::Dense(DMatrix::from_fn(m, n, |_, _| {
                rng.random_range(-1.0..1.0) * scale
            }))
        }
    };
    let m_eff = e.nrows();

    let phi = if idx.is_multiple_of(2) {
        ProxFunction::l1(rng.random_range(0.3..2.0), m_eff).unwrap()
    } else {
        random_box(rng, m_eff, true)
    };

    let c = [0.5, 1.0, 10.0][idx % 3];
    Problem::new(smooth, e, phi, c).unwrap()
}

/// Redraw a point until its shifted image stays [`KINK_MARGIN`] away from
/// every kink of the prox.
pub fn sample_point_off_kinks(rng: &mut ChaCha8Rng, p: &Problem) -> PrimalDual {
    for _ in 0..200 {
        let pt = PrimalDual::new(
            uniform_vec(rng, p.primal_dim(), -1.5, 1.5),
            uniform_vec(rng, p.dual_dim(), -1.5, 1.5),
        );
        let z = p.shifted_point(&pt).unwrap();
        if kink_distance(p.phi(), p.penalty(), &z) > KINK_MARGIN {
            return pt;
        }
    }
    panic!("could not sample a point off the kink set");
}
