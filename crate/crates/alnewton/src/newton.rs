//! Linear Newton method on the stacked gradient map of the augmented
//! Lagrangian.
//!
//! The gradient map splits into a smooth part and a proximity-operator
//! part, and replacing the (nonexistent) Jacobian of the latter with an
//! element `G` of the limiting Jacobian of the prox yields the
//! saddle-point approximation assembled by [`assemble_lna`]:
//!
//! ```text
//! [ hess f(x) + c E^T (I-G) E    ((I-G) E)^T ]
//! [ (I-G) E                      -G / c      ]
//! ```
//!
//! with `G` drawn at `z = E x + lambda / c`. Three equivalent update
//! formulations are provided: the direction solve with the matrix above
//! ([`newton_direction`]), a full-step system for the next iterate
//! directly ([`full_step_update`]), and reduced primal-dual active-set
//! solves that exploit the 0/1 structure of `G`
//! ([`active_set_step_box`], [`active_set_step_l1`]). They produce the
//! same next iterate up to round-off; which one [`solve`] uses is a
//! configuration choice.
//!
//! There is no globalization: the iteration is the pure local method plus
//! divergence detection, with an optional first-order warm start to enter
//! the convergence basin.

use crate::lagrangian::{PrimalDual, Problem, ProblemError};
use crate::linalg::{inf_norm, ldlt, lu};
use crate::oracle;
use crate::prox::{JacobianElement, ProxError, ProxFunction, TieRule};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

/// Relative accuracy demanded of every linear-system solve; a solve whose
/// refined residual exceeds `LINEAR_RESIDUAL_TOL * (1 + ||rhs||)` is
/// treated as singular.
pub const LINEAR_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum NewtonError {
    #[error("linear system is numerically singular")]
    SingularSystem,
    #[error("{op} requires phi of kind {expected}")]
    PhiKindMismatch {
        op: &'static str,
        expected: &'static str,
    },
    #[error("jacobian element has dimension {actual}, expected {expected}")]
    JacobianDimension { expected: usize, actual: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Prox(#[from] ProxError),
}

/// Which linear system realizes the Newton update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// Solve for the step `(d_x, d_lambda)` with the full saddle matrix.
    Direction,
    /// Solve for the next iterate `(x+, lambda+)` directly.
    FullStep,
    /// Reduced saddle solve on the active rows; the primal-dual
    /// active-set specialization.
    ActiveSet,
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Formulation::Direction => write!(f, "direction"),
            Formulation::FullStep => write!(f, "fullstep"),
            Formulation::ActiveSet => write!(f, "activeset"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonConfig {
    /// Penalty of the augmented Lagrangian the iteration runs on. The
    /// problem's own penalty is replaced by this value for the solve.
    pub c: f64,
    /// Stopping tolerance on the infinity norm of the stacked gradient.
    pub tol: f64,
    pub max_iter: usize,
    pub tie_rule: TieRule,
    pub formulation: Formulation,
    /// Declare divergence when the residual exceeds this multiple of the
    /// initial residual.
    pub divergence_factor: f64,
    /// Number of first-order multiplier-method iterations run before the
    /// Newton loop to enter the local convergence basin.
    pub warm_start_steps: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-10,
            max_iter: 100,
            tie_rule: TieRule::PreferZero,
            formulation: Formulation::ActiveSet,
            divergence_factor: 1e6,
            warm_start_steps: 0,
        }
    }
}

impl NewtonConfig {
    fn validate(&self) -> Result<(), NewtonError> {
        if !(self.c > 0.0) {
            return Err(NewtonError::InvalidConfig(format!(
                "penalty c must be positive, got {}",
                self.c
            )));
        }
        if !(self.tol > 0.0) {
            return Err(NewtonError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !(self.divergence_factor > 0.0) {
            return Err(NewtonError::InvalidConfig(format!(
                "divergence factor must be positive, got {}",
                self.divergence_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    SingularSystem,
    Diverged,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveStatus::Converged => write!(f, "converged"),
            SolveStatus::MaxIterations => write!(f, "max_iterations"),
            SolveStatus::SingularSystem => write!(f, "singular_system"),
            SolveStatus::Diverged => write!(f, "diverged"),
        }
    }
}

/// Full history of a solve. `residual_norms` has length
/// `iterations + 1`; `ratios[k]` is the quotient of consecutive residual
/// norms, the empirical superlinear-convergence diagnostic.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterates: Vec<PrimalDual>,
    pub residual_norms: Vec<f64>,
    pub ratios: Vec<f64>,
    pub iterations: usize,
    /// Zero set of the selected Jacobian element at each completed step
    /// (the active/thresholded index set of the reduced systems).
    pub active_set_history: Vec<Vec<usize>>,
}

impl SolveReport {
    pub fn final_point(&self) -> &PrimalDual {
        self.iterates.last().expect("report always holds the start point")
    }

    pub fn final_residual(&self) -> f64 {
        *self
            .residual_norms
            .last()
            .expect("report always holds the initial residual")
    }
}

/// The 2x2-block linear Newton approximation assembled at an iterate.
///
/// `block_xl` and `block_lx` are built by two independent scalings of the
/// same dense `E`, so the exact-transpose relation between them reflects
/// the symmetry of the diagonal `G` rather than a shared code path. The
/// lower-right block is diagonal with entries in `{0, -1/c}` and is
/// stored as its diagonal.
#[derive(Debug, Clone)]
pub struct LnaMatrix {
    pub block_xx: DMatrix<f64>,
    pub block_xl: DMatrix<f64>,
    pub block_lx: DMatrix<f64>,
    pub block_ll_diag: DVector<f64>,
}

impl LnaMatrix {
    pub fn primal_dim(&self) -> usize {
        self.block_xx.nrows()
    }

    pub fn dual_dim(&self) -> usize {
        self.block_ll_diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.primal_dim();
        let m = self.dual_dim();
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&self.block_xx);
        k.view_mut((0, n), (n, m)).copy_from(&self.block_xl);
        k.view_mut((n, 0), (m, n)).copy_from(&self.block_lx);
        for j in 0..m {
            k[(n + j, n + j)] = self.block_ll_diag[j];
        }
        k
    }
}

fn check_jacobian_dim(p: &Problem, g: &JacobianElement) -> Result<(), NewtonError> {
    if g.dim() != p.dual_dim() {
        return Err(NewtonError::JacobianDimension {
            expected: p.dual_dim(),
            actual: g.dim(),
        });
    }
    Ok(())
}

/// Assemble the linear Newton approximation at an iterate, given an
/// element `G` of the limiting Jacobian of the prox at
/// `z = E x + lambda / c`.
pub fn assemble_lna(
    p: &Problem,
    pt: &PrimalDual,
    g: &JacobianElement,
) -> Result<LnaMatrix, NewtonError> {
    check_jacobian_dim(p, g)?;
    let c = p.penalty();
    let n = p.primal_dim();
    let m = p.dual_dim();
    let ed = p.map().to_dense();
    let h = p.smooth().hessian(&pt.x);

    // (I - G) E by exact row selection: 1 - g is exactly 0 or 1
    let mut lx = DMatrix::zeros(m, n);
    for r in 0..m {
        if !g.is_one(r) {
            lx.row_mut(r).copy_from(&ed.row(r));
        }
    }
    // E^T (I - G), the same entries laid out transposed
    let mut xl = DMatrix::zeros(n, m);
    for r in 0..m {
        if !g.is_one(r) {
            for i in 0..n {
                xl[(i, r)] = ed[(r, i)];
            }
        }
    }

    // hess f + c E^T (I - G) E, accumulated symmetrically so the block is
    // exactly symmetric
    let mut xx = h;
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for r in 0..m {
                if !g.is_one(r) {
                    s += ed[(r, i)] * ed[(r, j)];
                }
            }
            let v = c * s;
            xx[(i, j)] += v;
            if i != j {
                xx[(j, i)] += v;
            }
        }
    }

    let ll = DVector::from_fn(m, |j, _| if g.is_one(j) { -1.0 / c } else { 0.0 });

    Ok(LnaMatrix {
        block_xx: xx,
        block_xl: xl,
        block_lx: lx,
        block_ll_diag: ll,
    })
}

/// Solve the Newton system `M d = rhs` with `rhs = -residual`; returns the
/// stacked step `(d_x, d_lambda)`.
pub fn newton_direction(m: &LnaMatrix, rhs: &DVector<f64>) -> Result<DVector<f64>, NewtonError> {
    let dim = m.primal_dim() + m.dual_dim();
    if rhs.len() != dim {
        return Err(NewtonError::Problem(ProblemError::PrimalDimension {
            expected: dim,
            actual: rhs.len(),
        }));
    }
    let k = m.to_dense();
    let factor = ldlt::LdltFactor::new(&k).map_err(|_| NewtonError::SingularSystem)?;
    let (d, res) = ldlt::solve_refined(&k, &factor, rhs);
    if res > LINEAR_RESIDUAL_TOL * (1.0 + inf_norm(rhs)) {
        return Err(NewtonError::SingularSystem);
    }
    Ok(d)
}

/// Solve the alternative full-step system for the next iterate directly:
///
/// ```text
/// [ hess f(x)   E^T   ] [ x+       ]   [ hess f(x) x - grad f(x) ]
/// [ (I-G) E     -G/c  ] [ lambda+  ] = [ prox(z) - G z           ]
/// ```
///
/// Algebraically equivalent to adding the direction-solve step.
pub fn full_step_update(
    p: &Problem,
    pt: &PrimalDual,
    g: &JacobianElement,
) -> Result<PrimalDual, NewtonError> {
    check_jacobian_dim(p, g)?;
    let c = p.penalty();
    let n = p.primal_dim();
    let m = p.dual_dim();
    let ed = p.map().to_dense();
    let h = p.smooth().hessian(&pt.x);
    let z = p.shifted_point(pt)?;
    let prox_z = p.phi().prox(c, &z)?;

    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(&h);
    k.view_mut((0, n), (n, m)).copy_from(&ed.transpose());
    for r in 0..m {
        if !g.is_one(r) {
            for j in 0..n {
                k[(n + r, j)] = ed[(r, j)];
            }
        } else {
            k[(n + r, n + r)] = -1.0 / c;
        }
    }

    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n)
        .copy_from(&(&h * &pt.x - p.smooth().gradient(&pt.x)));
    for r in 0..m {
        let gz = if g.is_one(r) { z[r] } else { 0.0 };
        rhs[n + r] = prox_z[r] - gz;
    }

    let factor = lu::LuFactor::new(&k).map_err(|_| NewtonError::SingularSystem)?;
    let (sol, res) = lu::solve_refined(&k, &factor, &rhs);
    if res > LINEAR_RESIDUAL_TOL * (1.0 + inf_norm(&rhs)) {
        return Err(NewtonError::SingularSystem);
    }
    Ok(PrimalDual::from_stacked(&sol, n))
}

/// Reduced saddle solve shared by the two active-set specializations.
/// `o` indexes the rows with `G = 0`; `lambda_inactive` carries the
/// closed-form multipliers on the complement `i`.
fn reduced_step(
    p: &Problem,
    pt: &PrimalDual,
    o: &[usize],
    i: &[usize],
    lambda_inactive: &DVector<f64>,
    prox_z: &DVector<f64>,
) -> Result<PrimalDual, NewtonError> {
    let n = p.primal_dim();
    let m = p.dual_dim();
    let h = p.smooth().hessian(&pt.x);
    let e_o = p.map().select_rows(o).to_dense();

    let dim = n + o.len();
    let mut k = DMatrix::zeros(dim, dim);
    k.view_mut((0, 0), (n, n)).copy_from(&h);
    k.view_mut((n, 0), (o.len(), n)).copy_from(&e_o);
    k.view_mut((0, n), (n, o.len())).copy_from(&e_o.transpose());

    let mut rhs = DVector::zeros(dim);
    let mut top = &h * &pt.x - p.smooth().gradient(&pt.x);
    if !i.is_empty() {
        let li = DVector::from_fn(i.len(), |k_, _| lambda_inactive[i[k_]]);
        top -= p
            .map()
            .select_rows(i)
            .tr_matvec(&li)
            .map_err(ProblemError::from)?;
    }
    rhs.rows_mut(0, n).copy_from(&top);
    for (k_, &r) in o.iter().enumerate() {
        rhs[n + k_] = prox_z[r];
    }

    let factor = ldlt::LdltFactor::new(&k).map_err(|_| NewtonError::SingularSystem)?;
    let (sol, res) = ldlt::solve_refined(&k, &factor, &rhs);
    if res > LINEAR_RESIDUAL_TOL * (1.0 + inf_norm(&rhs)) {
        return Err(NewtonError::SingularSystem);
    }

    let x_next = sol.rows(0, n).into_owned();
    let mut lambda_next = DVector::zeros(m);
    for (k_, &r) in o.iter().enumerate() {
        lambda_next[r] = sol[n + k_];
    }
    for &r in i {
        lambda_next[r] = lambda_inactive[r];
    }
    Ok(PrimalDual::new(x_next, lambda_next))
}

/// Primal-dual active-set update for box-constrained problems: the
/// multipliers of the strictly interior components are set to zero and the
/// reduced saddle system `[[hess f, E_o^T], [E_o, 0]]` determines the rest.
pub fn active_set_step_box(
    p: &Problem,
    pt: &PrimalDual,
    g: &JacobianElement,
) -> Result<PrimalDual, NewtonError> {
    if !matches!(p.phi(), ProxFunction::BoxIndicator { .. }) {
        return Err(NewtonError::PhiKindMismatch {
            op: "active_set_step_box",
            expected: "BoxIndicator",
        });
    }
    check_jacobian_dim(p, g)?;
    let z = p.shifted_point(pt)?;
    let prox_z = p.phi().prox(p.penalty(), &z)?;
    let o = g.zero_set();
    let i = g.one_set();
    let lambda_inactive = DVector::zeros(p.dual_dim());
    reduced_step(p, pt, &o, &i, &lambda_inactive, &prox_z)
}

/// Primal-dual active-set update for l1-regularized problems: the
/// multipliers of the above-threshold components take the closed form
/// `alpha * sign(z_j)` and the reduced saddle system determines the rest.
pub fn active_set_step_l1(
    p: &Problem,
    pt: &PrimalDual,
    g: &JacobianElement,
) -> Result<PrimalDual, NewtonError> {
    let alpha = match p.phi() {
        ProxFunction::L1Norm { alpha, .. } => *alpha,
        _ => {
            return Err(NewtonError::PhiKindMismatch {
                op: "active_set_step_l1",
                expected: "L1Norm",
            })
        }
    };
    check_jacobian_dim(p, g)?;
    let z = p.shifted_point(pt)?;
    let prox_z = p.phi().prox(p.penalty(), &z)?;
    let o = g.zero_set();
    let i = g.one_set();
    let mut lambda_inactive = DVector::zeros(p.dual_dim());
    for &r in &i {
        lambda_inactive[r] = alpha * z[r].signum();
    }
    reduced_step(p, pt, &o, &i, &lambda_inactive, &prox_z)
}

/// The outer Newton iteration.
///
/// Starting from `start` (optionally preceded by
/// `cfg.warm_start_steps` first-order multiplier-method iterations), the
/// loop checks the stopping test, selects a Jacobian element at the
/// shifted point, performs the configured update, and records the full
/// history. Failures surface through [`SolveStatus`], never silently.
pub fn solve(
    p: &Problem,
    start: &PrimalDual,
    cfg: &NewtonConfig,
) -> Result<SolveReport, NewtonError> {
    cfg.validate()?;
    let p = p.with_penalty(cfg.c)?;
    let n = p.primal_dim();

    let mut pt = if cfg.warm_start_steps > 0 {
        oracle::alm_warm_start(&p, start, cfg.warm_start_steps)
            .map_err(|e| NewtonError::InvalidConfig(format!("warm start failed: {e}")))?
    } else {
        start.clone()
    };

    let r0 = p.residual_inf_norm(&pt)?;
    let mut iterates = vec![pt.clone()];
    let mut residual_norms = vec![r0];
    let mut ratios = Vec::new();
    let mut active_set_history = Vec::new();
    let mut iterations = 0usize;

    let status = loop {
        let rk = *residual_norms.last().unwrap();
        if rk <= cfg.tol {
            break SolveStatus::Converged;
        }
        if !rk.is_finite() || rk > cfg.divergence_factor * residual_norms[0] {
            break SolveStatus::Diverged;
        }
        if iterations >= cfg.max_iter {
            break SolveStatus::MaxIterations;
        }

        let z = p.shifted_point(&pt)?;
        let g = p.phi().jacobian_element(cfg.c, &z, cfg.tie_rule)?;
        let stepped = match cfg.formulation {
            Formulation::Direction => {
                let m = assemble_lna(&p, &pt, &g)?;
                let rhs = -p.residual(&pt)?;
                newton_direction(&m, &rhs).map(|d| {
                    let dp = PrimalDual::from_stacked(&d, n);
                    PrimalDual::new(&pt.x + dp.x, &pt.lambda + dp.lambda)
                })
            }
            Formulation::FullStep => full_step_update(&p, &pt, &g),
            Formulation::ActiveSet => match p.phi() {
                ProxFunction::BoxIndicator { .. } => active_set_step_box(&p, &pt, &g),
                ProxFunction::L1Norm { .. } => active_set_step_l1(&p, &pt, &g),
            },
        };

        match stepped {
            Ok(next) => {
                active_set_history.push(g.zero_set());
                pt = next;
                let r = p.residual_inf_norm(&pt)?;
                ratios.push(r / rk);
                residual_norms.push(r);
                iterates.push(pt.clone());
                iterations += 1;
            }
            Err(NewtonError::SingularSystem) => break SolveStatus::SingularSystem,
            Err(e) => return Err(e),
        }
    };

    Ok(SolveReport {
        status,
        iterates,
        residual_norms,
        ratios,
        iterations,
        active_set_history,
    })
}

/// Advisory diagnostics for the nonsingularity hypotheses: a uniformly
/// positive definite Hessian and a surjective `E` guarantee every Newton
/// system is solvable. The solve itself proceeds regardless and relies on
/// factorization-time singularity detection.
#[derive(Debug, Clone, Serialize)]
pub struct NonsingularityReport {
    pub hessian_min_eigenvalue: f64,
    pub map_rank: usize,
    pub map_rows: usize,
    pub hypotheses_hold: bool,
}

pub fn nonsingularity_diagnostics(
    p: &Problem,
    pt: &PrimalDual,
) -> Result<NonsingularityReport, NewtonError> {
    let h = p.smooth().hessian(&pt.x);
    let eig = h.symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);

    let ed = p.map().to_dense();
    let svd = ed.svd(false, false);
    let sigma_max = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * sigma_max.max(1e-300))
        .count();

    Ok(NonsingularityReport {
        hessian_min_eigenvalue: min_eig,
        map_rank: rank,
        map_rows: p.dual_dim(),
        hypotheses_hold: rank == p.dual_dim() && min_eig > 0.0,
    })
}
