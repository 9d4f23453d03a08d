//! Seeded random instance generation for the benchmark suites.
//!
//! Quadratic instances use `A = M^T M + delta I` with `delta = 1e-2`, which
//! keeps the Hessian uniformly positive definite, and a dense Gaussian `E`
//! whose full rank is verified at generation. The box bounds and l1 weight
//! are calibrated from the unconstrained solution so that a sizable
//! fraction of the constraints is active at the optimum without ever
//! driving the active set past the primal dimension.

use crate::lagrangian::{PrimalDual, Problem, QuadraticObjective};
use crate::linalg::LinearMap;
use crate::prox::ProxFunction;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

const HESSIAN_RIDGE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    QpBox,
    QpL1,
    Toy,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qp-box" => Ok(Suite::QpBox),
            "qp-l1" => Ok(Suite::QpL1),
            "toy" => Ok(Suite::Toy),
            other => Err(format!("unknown suite {other:?} (expected qp-box, qp-l1 or toy)")),
        }
    }
}

pub struct Instance {
    pub id: String,
    pub problem: Problem,
    pub start: PrimalDual,
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let g: f64 = StandardNormal.sample(rng);
        g * scale
    })
}

fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| StandardNormal.sample(rng))
}

/// k-th order statistic of |v| as a calibration level.
fn abs_quantile(v: &DVector<f64>, q: f64) -> f64 {
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((mags.len() - 1) as f64 * q).floor() as usize;
    mags[idx]
}

fn full_rank(e: &DMatrix<f64>) -> bool {
    let svd = e.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1e-300))
        .count();
    rank == e.nrows().min(e.ncols())
}

struct QpParts {
    a: DMatrix<f64>,
    b: DVector<f64>,
    e: DMatrix<f64>,
    /// image of the unconstrained minimizer under `E`
    w: DVector<f64>,
}

fn qp_parts(n: usize, m: usize, seed: u64, tag: u64) -> QpParts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(tag));
    // scales chosen so the first-order multiplier method contracts fast at
    // unit penalty: a mild smooth curvature against a strong map keeps the
    // warm start inside the Newton basin after a handful of steps
    let mmat = gaussian_matrix(&mut rng, n, n, 0.3 / (n as f64).sqrt());
    let a = mmat.transpose() * &mmat + DMatrix::identity(n, n) * HESSIAN_RIDGE;
    let b = gaussian_vector(&mut rng, n);
    // a Haar-random map with orthonormal rows (columns when m > n): every
    // row submatrix stays uniformly well conditioned, which the pure local
    // method needs since it has no globalization
    let g = gaussian_matrix(&mut rng, m, n, 1.0);
    let e = if m <= n {
        2.0 * g.transpose().qr().q().transpose()
    } else {
        2.0 * g.qr().q()
    };
    assert!(full_rank(&e), "generated map lost full rank (seed {seed})");
    let x_free = a
        .clone()
        .cholesky()
        .expect("ridge keeps A positive definite")
        .solve(&b);
    let w = &e * &x_free;
    QpParts { a, b, e, w }
}

/// Box-constrained quadratic program. The symmetric box level is the 60th
/// percentile of |E x_free|, so roughly 40% of the constraints are active
/// at the solution.
pub fn qp_box(n: usize, m: usize, seed: u64) -> Instance {
    let parts = qp_parts(n, m, seed, 1);
    let level = abs_quantile(&parts.w, 0.6).max(1e-3);
    let phi = ProxFunction::box_indicator(
        DVector::from_element(m, -level),
        DVector::from_element(m, level),
    )
    .expect("symmetric box is nonempty");
    let q = QuadraticObjective::new(parts.a, parts.b).expect("generated A is symmetric");
    let problem = Problem::new(Arc::new(q), LinearMap::Dense(parts.e), phi, 1.0)
        .expect("generated dimensions are consistent");
    Instance {
        id: format!("qp-box-{n}x{m}-s{seed}"),
        problem,
        start: PrimalDual::zeros(n, m),
    }
}

/// l1-regularized quadratic program.
///
/// The weight is calibrated on the dual scale: with
/// `lambda_ls = argmin ||E^T lambda - b||` the all-zero image is optimal
/// only once `alpha` reaches roughly `||lambda_ls||_inf`, so a quarter of
/// that keeps the solution's thresholded set well below the primal
/// dimension (the reduced saddle systems stay nonsingular even for
/// m > n) while still zeroing a meaningful share of the image.
pub fn qp_l1(n: usize, m: usize, seed: u64) -> Instance {
    let parts = qp_parts(n, m, seed, 2);
    let lambda_ls = parts
        .e
        .transpose()
        .svd(true, true)
        .solve(&parts.b, 1e-12)
        .expect("least-squares multiplier exists");
    let dual_scale = lambda_ls.amax();
    let alpha = (0.25 * dual_scale).max(1e-3);
    let phi = ProxFunction::l1(alpha, m).expect("calibrated weight is positive");
    let q = QuadraticObjective::new(parts.a, parts.b).expect("generated A is symmetric");
    let problem = Problem::new(Arc::new(q), LinearMap::Dense(parts.e), phi, 1.0)
        .expect("generated dimensions are consistent");
    Instance {
        id: format!("qp-l1-{n}x{m}-s{seed}"),
        problem,
        start: PrimalDual::zeros(n, m),
    }
}

/// `min (x-2)^2 / 2  subject to  x <= 1`; solution (1, 1).
pub fn toy_box() -> Instance {
    let q = QuadraticObjective::new(
        DMatrix::identity(1, 1),
        DVector::from_vec(vec![2.0]),
    )
    .unwrap();
    let phi = ProxFunction::box_indicator(
        DVector::from_vec(vec![f64::NEG_INFINITY]),
        DVector::from_vec(vec![1.0]),
    )
    .unwrap();
    Instance {
        id: "toy-box".to_string(),
        problem: Problem::new(Arc::new(q), LinearMap::identity(1), phi, 1.0).unwrap(),
        start: PrimalDual::zeros(1, 1),
    }
}

/// `min x^2/2 - 2x + |x|`; solution (1, 1).
pub fn toy_l1() -> Instance {
    let q = QuadraticObjective::new(
        DMatrix::identity(1, 1),
        DVector::from_vec(vec![2.0]),
    )
    .unwrap();
    let phi = ProxFunction::l1(1.0, 1).unwrap();
    Instance {
        id: "toy-l1".to_string(),
        problem: Problem::new(Arc::new(q), LinearMap::identity(1), phi, 1.0).unwrap(),
        start: PrimalDual::zeros(1, 1),
    }
}

/// All instances of a suite over the requested sizes and seeds.
pub fn instances(suite: Suite, sizes: &[(usize, usize)], seeds: &[u64]) -> Vec<Instance> {
    match suite {
        Suite::Toy => vec![toy_box(), toy_l1()],
        Suite::QpBox => sizes
            .iter()
            .flat_map(|&(n, m)| seeds.iter().map(move |&s| qp_box(n, m, s)))
            .collect(),
        Suite::QpL1 => sizes
            .iter()
            .flat_map(|&(n, m)| seeds.iter().map(move |&s| qp_l1(n, m, s)))
            .collect(),
    }
}
