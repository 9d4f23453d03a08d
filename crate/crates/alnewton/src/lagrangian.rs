//! The augmented Lagrangian of the composite problem
//! `min_x f(x) + phi(E x)` and its first-order calculus.
//!
//! For a penalty `c > 0` the augmented Lagrangian is
//!
//! ```text
//! L_c(x, lambda) = f(x) + phi_c(E x + lambda / c) - ||lambda||^2 / (2 c)
//! ```
//!
//! where `phi_c` is the Moreau envelope. `L_c` is finite everywhere,
//! convex and differentiable in `x`, concave and differentiable in
//! `lambda`, and its stationary pairs are exactly the solutions of the
//! composite problem together with their multipliers — independently of
//! the value of `c`. The solver drives the stacked gradient map
//! ([`Problem::residual`]) to zero.

use crate::linalg::{inf_norm, LinalgError, LinearMap};
use crate::prox::{ProxError, ProxFunction};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("primal point has length {actual}, expected {expected}")]
    PrimalDimension { expected: usize, actual: usize },
    #[error("multiplier has length {actual}, expected {expected}")]
    DualDimension { expected: usize, actual: usize },
    #[error("map E is {e_rows}x{e_cols} but phi lives on R^{phi_dim}")]
    MapRangeMismatch {
        e_rows: usize,
        e_cols: usize,
        phi_dim: usize,
    },
    #[error("map E is {e_rows}x{e_cols} but the smooth objective lives on R^{smooth_dim}")]
    MapDomainMismatch {
        e_rows: usize,
        e_cols: usize,
        smooth_dim: usize,
    },
    #[error("penalty parameter c must be positive, got {0}")]
    NonPositivePenalty(f64),
    #[error("objective matrix must be square, got {nrows}x{ncols}")]
    ObjectiveNotSquare { nrows: usize, ncols: usize },
    #[error("objective matrix is not symmetric: |A - A^T| reaches {asymmetry:.3e} (relative tolerance 1e-12)")]
    ObjectiveNotSymmetric { asymmetry: f64 },
    #[error("objective linear term has length {actual}, expected {expected}")]
    ObjectiveLinearTerm { expected: usize, actual: usize },
    #[error(transparent)]
    Prox(#[from] ProxError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Oracle interface for the smooth convex part `f`.
pub trait SmoothObjective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Exact Hessian; the Newton iteration requires it.
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// `f(x) = (1/2) x^T A x - b^T x` with symmetric `A`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl QuadraticObjective {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self, ProblemError> {
        if a.nrows() != a.ncols() {
            return Err(ProblemError::ObjectiveNotSquare {
                nrows: a.nrows(),
                ncols: a.ncols(),
            });
        }
        let scale = a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0);
        let mut asym = 0.0_f64;
        for i in 0..a.nrows() {
            for j in (i + 1)..a.ncols() {
                asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
            }
        }
        if asym > 1e-12 * scale {
            return Err(ProblemError::ObjectiveNotSymmetric { asymmetry: asym / scale });
        }
        if b.len() != a.nrows() {
            return Err(ProblemError::ObjectiveLinearTerm {
                expected: a.nrows(),
                actual: b.len(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn linear_term(&self) -> &DVector<f64> {
        &self.b
    }
}

impl SmoothObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x)) - self.b.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.a.clone()
    }
}

/// Separable non-quadratic test objective
/// `f(x) = sum_j exp(a_j x_j) - a_j x_j + (ridge/2) x_j^2`.
///
/// Smooth, strictly convex, with a uniformly positive definite Hessian
/// whenever `ridge > 0`; exercises the general-smooth code paths.
#[derive(Debug, Clone)]
pub struct SeparableExpObjective {
    rates: DVector<f64>,
    ridge: f64,
}

impl SeparableExpObjective {
    pub fn new(rates: DVector<f64>, ridge: f64) -> Self {
        Self { rates, ridge }
    }

    pub fn uniform(rate: f64, ridge: f64, dim: usize) -> Self {
        Self::new(DVector::from_element(dim, rate), ridge)
    }
}

impl SmoothObjective for SeparableExpObjective {
    fn dim(&self) -> usize {
        self.rates.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        (0..x.len())
            .map(|j| {
                let a = self.rates[j];
                (a * x[j]).exp() - a * x[j] + 0.5 * self.ridge * x[j] * x[j]
            })
            .sum()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(x.len(), |j, _| {
            let a = self.rates[j];
            a * ((a * x[j]).exp() - 1.0) + self.ridge * x[j]
        })
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_fn(x.len(), |j, _| {
            let a = self.rates[j];
            a * a * (a * x[j]).exp() + self.ridge
        }))
    }
}

/// A point in primal-dual space.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDual {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
}

impl PrimalDual {
    pub fn new(x: DVector<f64>, lambda: DVector<f64>) -> Self {
        Self { x, lambda }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            x: DVector::zeros(n),
            lambda: DVector::zeros(m),
        }
    }

    /// Stack `(x, lambda)` into a single vector.
    pub fn stacked(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.x.len() + self.lambda.len());
        v.rows_mut(0, self.x.len()).copy_from(&self.x);
        v.rows_mut(self.x.len(), self.lambda.len()).copy_from(&self.lambda);
        v
    }

    pub fn from_stacked(v: &DVector<f64>, n: usize) -> Self {
        Self {
            x: v.rows(0, n).into_owned(),
            lambda: v.rows(n, v.len() - n).into_owned(),
        }
    }
}

/// The composite problem data: smooth oracle `f`, linear map `E`,
/// separable nonsmooth part `phi`, and the penalty `c` of the augmented
/// Lagrangian. Immutable after construction; clones share the smooth
/// oracle, so re-penalized copies are cheap.
#[derive(Clone)]
pub struct Problem {
    smooth: Arc<dyn SmoothObjective>,
    e: LinearMap,
    phi: ProxFunction,
    c: f64,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("n", &self.primal_dim())
            .field("m", &self.dual_dim())
            .field("phi", &self.phi)
            .field("c", &self.c)
            .finish()
    }
}

impl Problem {
    pub fn new(
        smooth: Arc<dyn SmoothObjective>,
        e: LinearMap,
        phi: ProxFunction,
        c: f64,
    ) -> Result<Self, ProblemError> {
        if e.nrows() != phi.dim() {
            return Err(ProblemError::MapRangeMismatch {
                e_rows: e.nrows(),
                e_cols: e.ncols(),
                phi_dim: phi.dim(),
            });
        }
        if e.ncols() != smooth.dim() {
            return Err(ProblemError::MapDomainMismatch {
                e_rows: e.nrows(),
                e_cols: e.ncols(),
                smooth_dim: smooth.dim(),
            });
        }
        if !(c > 0.0) {
            return Err(ProblemError::NonPositivePenalty(c));
        }
        Ok(Self { smooth, e, phi, c })
    }

    pub fn smooth(&self) -> &dyn SmoothObjective {
        self.smooth.as_ref()
    }

    pub fn map(&self) -> &LinearMap {
        &self.e
    }

    pub fn phi(&self) -> &ProxFunction {
        &self.phi
    }

    pub fn penalty(&self) -> f64 {
        self.c
    }

    /// Same problem data under a different penalty.
    pub fn with_penalty(&self, c: f64) -> Result<Self, ProblemError> {
        if !(c > 0.0) {
            return Err(ProblemError::NonPositivePenalty(c));
        }
        let mut p = self.clone();
        p.c = c;
        Ok(p)
    }

    pub fn primal_dim(&self) -> usize {
        self.e.ncols()
    }

    pub fn dual_dim(&self) -> usize {
        self.e.nrows()
    }

    /// The composite objective `f(x) + phi(E x)` as an extended real
    /// (infinite outside the domain of `phi`).
    pub fn objective(&self, x: &DVector<f64>) -> Result<f64, ProblemError> {
        self.check_x(x)?;
        let ex = self.e.matvec(x)?;
        Ok(self.smooth.value(x) + self.phi.eval(&ex)?.as_f64())
    }

    fn check_x(&self, x: &DVector<f64>) -> Result<(), ProblemError> {
        if x.len() != self.primal_dim() {
            return Err(ProblemError::PrimalDimension {
                expected: self.primal_dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn check_point(&self, pt: &PrimalDual) -> Result<(), ProblemError> {
        self.check_x(&pt.x)?;
        if pt.lambda.len() != self.dual_dim() {
            return Err(ProblemError::DualDimension {
                expected: self.dual_dim(),
                actual: pt.lambda.len(),
            });
        }
        Ok(())
    }

    /// The shifted point `z = E x + lambda / c` at which every prox-based
    /// quantity of the Lagrangian is evaluated.
    pub fn shifted_point(&self, pt: &PrimalDual) -> Result<DVector<f64>, ProblemError> {
        self.check_point(pt)?;
        Ok(self.e.matvec(&pt.x)? + &pt.lambda / self.c)
    }

    /// `L_c(x, lambda)`; finite for every pair.
    pub fn lagrangian_value(&self, pt: &PrimalDual) -> Result<f64, ProblemError> {
        let z = self.shifted_point(pt)?;
        Ok(self.smooth.value(&pt.x) + self.phi.moreau(self.c, &z)?
            - pt.lambda.norm_squared() / (2.0 * self.c))
    }

    /// `D_x L_c = grad f(x) + c E^T (z - prox(z))` at `z = E x + lambda/c`.
    pub fn lagrangian_grad_x(&self, pt: &PrimalDual) -> Result<DVector<f64>, ProblemError> {
        let z = self.shifted_point(pt)?;
        let g = self.phi.moreau_grad(self.c, &z)?;
        Ok(self.smooth.gradient(&pt.x) + self.e.tr_matvec(&g)?)
    }

    /// `D_lambda L_c = E x - prox(z)`; its norm is the primal
    /// feasibility/complementarity residual.
    pub fn lagrangian_grad_lambda(&self, pt: &PrimalDual) -> Result<DVector<f64>, ProblemError> {
        let z = self.shifted_point(pt)?;
        let p = self.phi.prox(self.c, &z)?;
        Ok(self.e.matvec(&pt.x)? - p)
    }

    /// The stacked gradient map `(D_x L_c, D_lambda L_c)`; zero exactly at
    /// solutions of the optimality system, for every `c > 0`.
    pub fn residual(&self, pt: &PrimalDual) -> Result<DVector<f64>, ProblemError> {
        let z = self.shifted_point(pt)?;
        let p = self.phi.prox(self.c, &z)?;
        let gx = self.smooth.gradient(&pt.x) + self.e.tr_matvec(&(self.c * (&z - &p)))?;
        let gl = self.e.matvec(&pt.x)? - p;
        let n = self.primal_dim();
        let mut r = DVector::zeros(n + self.dual_dim());
        r.rows_mut(0, n).copy_from(&gx);
        r.rows_mut(n, self.dual_dim()).copy_from(&gl);
        Ok(r)
    }

    /// Infinity norm of [`Problem::residual`]; the solver's stopping
    /// quantity.
    pub fn residual_inf_norm(&self, pt: &PrimalDual) -> Result<f64, ProblemError> {
        Ok(inf_norm(&self.residual(pt)?))
    }

    /// Gap of the algebraic identity
    /// `D_x L_c = grad f + E^T (lambda + c D_lambda L_c)`; at most
    /// `1e-12 (1 + ||D_x L_c||)` everywhere.
    pub fn grad_identity_gap(&self, pt: &PrimalDual) -> Result<f64, ProblemError> {
        let gx = self.lagrangian_grad_x(pt)?;
        let gl = self.lagrangian_grad_lambda(pt)?;
        let alt = self.smooth.gradient(&pt.x)
            + self.e.tr_matvec(&(&pt.lambda + self.c * gl))?;
        Ok((gx - alt).norm())
    }

    /// The two residuals of the multiplier form of the optimality system:
    /// `(||grad f + E^T lambda||_inf, ||E x - prox(E x + lambda/c)||_inf)`.
    /// Both below a tolerance certifies a solution of the composite
    /// problem.
    pub fn kkt_residuals(&self, pt: &PrimalDual) -> Result<(f64, f64), ProblemError> {
        self.check_point(pt)?;
        let stat = self.smooth.gradient(&pt.x) + self.e.tr_matvec(&pt.lambda)?;
        let gl = self.lagrangian_grad_lambda(pt)?;
        Ok((inf_norm(&stat), inf_norm(&gl)))
    }

    /// The multiplier fixed-point map `lambda + c D_lambda L_c`, i.e. the
    /// gradient of the generalized Moreau-Yosida approximation at
    /// `(E x, lambda)`. Equals `lambda` exactly at optimal pairs.
    pub fn multiplier_map(&self, pt: &PrimalDual) -> Result<DVector<f64>, ProblemError> {
        let gl = self.lagrangian_grad_lambda(pt)?;
        Ok(&pt.lambda + self.c * gl)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearMap;
    use approx::assert_abs_diff_eq;

    fn vecd(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    /// f = x^2/2, E = identity on R, phi = |.|, c = 1.
    fn toy_least_norm() -> Problem {
        let q = QuadraticObjective::new(DMatrix::identity(1, 1), vecd(&[0.0])).unwrap();
        Problem::new(
            Arc::new(q),
            LinearMap::identity(1),
            ProxFunction::l1(1.0, 1).unwrap(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn lagrangian_values_on_the_scalar_example() {
        let p = toy_least_norm();
        let at = |x: f64, l: f64| PrimalDual::new(vecd(&[x]), vecd(&[l]));
        assert_abs_diff_eq!(p.lagrangian_value(&at(0.0, 0.0)).unwrap(), 0.0, epsilon = 1e-15);
        // x = 2: f = 2, envelope of |.| at 2 is 1.5
        assert_abs_diff_eq!(p.lagrangian_value(&at(2.0, 0.0)).unwrap(), 3.5, epsilon = 1e-12);
        // lambda = 2: envelope at 2 minus ||lambda||^2 / 2
        assert_abs_diff_eq!(p.lagrangian_value(&at(0.0, 2.0)).unwrap(), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn gradients_on_the_scalar_example() {
        let p = toy_least_norm();
        let pt = PrimalDual::new(vecd(&[2.0]), vecd(&[0.0]));
        assert_abs_diff_eq!(p.lagrangian_grad_x(&pt).unwrap()[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.lagrangian_grad_lambda(&pt).unwrap()[0], 1.0, epsilon = 1e-12);
        let r = p.residual(&pt).unwrap();
        assert_abs_diff_eq!(r[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.multiplier_map(&pt).unwrap()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gradients_vanish_at_an_analytic_kkt_pair() {
        // min x^2/2 - 2x + |x| has solution x = 1 with multiplier 1
        let q = QuadraticObjective::new(DMatrix::identity(1, 1), vecd(&[2.0])).unwrap();
        let p = Problem::new(
            Arc::new(q),
            LinearMap::identity(1),
            ProxFunction::l1(1.0, 1).unwrap(),
            1.0,
        )
        .unwrap();
        let pt = PrimalDual::new(vecd(&[1.0]), vecd(&[1.0]));
        assert_abs_diff_eq!(p.residual_inf_norm(&pt).unwrap(), 0.0, epsilon = 1e-14);
        let (s, f) = p.kkt_residuals(&pt).unwrap();
        assert!(s <= 1e-14 && f <= 1e-14);
        // the multiplier map fixes lambda at the solution
        assert_abs_diff_eq!(p.multiplier_map(&pt).unwrap()[0], 1.0, epsilon = 1e-14);
        // and the certificate survives a change of penalty
        for c in [0.5, 10.0] {
            let pc = p.with_penalty(c).unwrap();
            assert!(pc.residual_inf_norm(&pt).unwrap() <= 1e-12);
            let (s, f) = pc.kkt_residuals(&pt).unwrap();
            assert!(s <= 1e-12 && f <= 1e-12);
        }
    }

    #[test]
    fn kkt_residual_tracks_a_perturbation() {
        let q = QuadraticObjective::new(DMatrix::identity(1, 1), vecd(&[2.0])).unwrap();
        let p = Problem::new(
            Arc::new(q),
            LinearMap::identity(1),
            ProxFunction::l1(1.0, 1).unwrap(),
            1.0,
        )
        .unwrap();
        let pt = PrimalDual::new(vecd(&[1.1]), vecd(&[1.0]));
        let (s, _) = p.kkt_residuals(&pt).unwrap();
        assert_abs_diff_eq!(s, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn dimension_errors_name_the_offender() {
        let p = toy_least_norm();
        let bad = PrimalDual::new(vecd(&[1.0, 2.0]), vecd(&[0.0]));
        assert!(matches!(
            p.lagrangian_value(&bad).unwrap_err(),
            ProblemError::PrimalDimension { expected: 1, actual: 2 }
        ));
        let bad = PrimalDual::new(vecd(&[1.0]), vecd(&[0.0, 0.0]));
        assert!(matches!(
            p.residual(&bad).unwrap_err(),
            ProblemError::DualDimension { expected: 1, actual: 2 }
        ));
    }

    #[test]
    fn construction_validates_shapes_and_symmetry() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(matches!(
            QuadraticObjective::new(a, vecd(&[0.0, 0.0])).unwrap_err(),
            ProblemError::ObjectiveNotSymmetric { .. }
        ));
        let q = QuadraticObjective::new(DMatrix::identity(2, 2), vecd(&[0.0, 0.0])).unwrap();
        // E maps R^2 -> R^2 but phi lives on R^3
        assert!(matches!(
            Problem::new(
                Arc::new(q.clone()),
                LinearMap::identity(2),
                ProxFunction::l1(1.0, 3).unwrap(),
                1.0
            )
            .unwrap_err(),
            ProblemError::MapRangeMismatch { .. }
        ));
        assert!(matches!(
            Problem::new(
                Arc::new(q),
                LinearMap::identity(2),
                ProxFunction::l1(1.0, 2).unwrap(),
                0.0
            )
            .unwrap_err(),
            ProblemError::NonPositivePenalty(_)
        ));
    }

    #[test]
    fn separable_exp_gradient_matches_finite_differences() {
        let f = SeparableExpObjective::new(vecd(&[0.7, -1.1, 0.3]), 0.05);
        let x = vecd(&[0.4, -0.2, 1.3]);
        let g = f.gradient(&x);
        let h = 1e-6;
        for j in 0..3 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            assert_abs_diff_eq!(g[j], fd, epsilon = 1e-6);
        }
        let hm = f.hessian(&x);
        for j in 0..3 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (f.gradient(&xp)[j] - f.gradient(&xm)[j]) / (2.0 * h);
            assert_abs_diff_eq!(hm[(j, j)], fd, epsilon = 1e-5);
        }
    }
}
