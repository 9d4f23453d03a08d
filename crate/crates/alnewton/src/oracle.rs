//! Independent reference solvers used to validate the Newton solver.
//!
//! None of these share linear algebra with the Newton path beyond
//! primitive matrix products: the multiplier method minimizes its
//! smooth-plus-envelope subproblems with a gradient-only quasi-Newton
//! loop, the prox-gradient iteration is matrix-free, and the brute-force
//! verifier is a grid scan. They exist for validation, not performance.

use crate::lagrangian::{PrimalDual, Problem, ProblemError};
use crate::linalg::inf_norm;
use crate::newton::{SolveReport, SolveStatus};
use nalgebra::DVector;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("prox-gradient oracle requires E = identity")]
    RequiresIdentityMap,
    #[error("oracle iteration budget exhausted before reaching tolerance")]
    MaxIterations,
    #[error("smooth subproblem solve failed: {0}")]
    InnerSolve(String),
    #[error("grid search found two near-optimal cells far apart; minimizer looks non-unique")]
    AmbiguousMinimizer,
    #[error("brute-force verifier supports n <= 2 and m <= 2, got n = {n}, m = {m}")]
    TooLarge { n: usize, m: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub max_iter: usize,
    pub tol: f64,
    /// Initial penalty; the multiplier method escalates it when the primal
    /// residual stalls.
    pub c: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            tol: 1e-9,
            c: 1.0,
        }
    }
}

/// Cap for the adaptive penalty escalation.
const MAX_PENALTY: f64 = 1e8;

/// Iteration cap of the inner minimization.
const MAX_INNER_ITERS: usize = 500;

/// Minimize the continuously differentiable function
/// `h(x) = f(x) + phi_c(E x + lambda/c)` — the augmented Lagrangian at
/// fixed multiplier, up to a constant — by limited-memory BFGS with
/// Armijo backtracking.
///
/// Gradient-only, so the work per iteration does not grow with the
/// penalty, and the curvature pairs absorb the envelope stiffness that a
/// plain gradient loop would choke on.
fn minimize_lagrangian_in_x(
    p: &Problem,
    lambda: &DVector<f64>,
    x0: &DVector<f64>,
    grad_tol: f64,
) -> Result<DVector<f64>, OracleError> {
    let c = p.penalty();
    let value = |x: &DVector<f64>| -> Result<f64, OracleError> {
        let z = p.map().matvec(x).map_err(ProblemError::from)? + lambda / c;
        Ok(p.smooth().value(x) + p.phi().moreau(c, &z).map_err(ProblemError::from)?)
    };
    let gradient = |x: &DVector<f64>| -> Result<DVector<f64>, OracleError> {
        let z = p.map().matvec(x).map_err(ProblemError::from)? + lambda / c;
        let env = p.phi().moreau_grad(c, &z).map_err(ProblemError::from)?;
        Ok(p.smooth().gradient(x) + p.map().tr_matvec(&env).map_err(ProblemError::from)?)
    };

    let mut x = x0.clone();
    let mut fx = value(&x)?;
    let mut g = gradient(&x)?;
    // (s, y, 1/(y.s)) pairs, newest last
    let mut pairs: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();

    for _ in 0..MAX_INNER_ITERS {
        if inf_norm(&g) <= grad_tol {
            break;
        }
        // two-loop recursion for the quasi-Newton direction
        let mut q = g.clone();
        let mut alphas = vec![0.0; pairs.len()];
        for (i, (sv, yv, rho)) in pairs.iter().enumerate().rev() {
            let a = rho * sv.dot(&q);
            q -= a * yv;
            alphas[i] = a;
        }
        if let Some((sv, yv, _)) = pairs.back() {
            q *= sv.dot(yv) / yv.dot(yv);
        }
        for (i, (sv, yv, rho)) in pairs.iter().enumerate() {
            let b = rho * yv.dot(&q);
            q += (alphas[i] - b) * sv;
        }
        let mut d = -q;
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            pairs.clear();
            d = -&g;
            slope = g.dot(&d);
            if !(slope < 0.0) {
                break;
            }
        }

        let mut t = 1.0;
        let (x_next, f_next) = loop {
            let cand = &x + t * &d;
            let fc = value(&cand)?;
            if fc <= fx + 1e-4 * t * slope + 1e-14 * (1.0 + fx.abs()) {
                break (cand, fc);
            }
            t *= 0.5;
            if t < 1e-13 {
                break (cand, fc);
            }
        };
        let g_next = gradient(&x_next)?;
        let s_vec = &x_next - &x;
        let y_vec = &g_next - &g;
        let ys = y_vec.dot(&s_vec);
        if ys > 1e-12 * y_vec.norm() * s_vec.norm() {
            pairs.push_back((s_vec, y_vec, 1.0 / ys));
            if pairs.len() > 12 {
                pairs.pop_front();
            }
        }
        x = x_next;
        fx = f_next;
        g = g_next;
    }
    Ok(x)
}

fn combined_kkt_residual(p: &Problem, pt: &PrimalDual) -> Result<f64, ProblemError> {
    let (s, f) = p.kkt_residuals(pt)?;
    Ok(s.max(f))
}

/// One outer multiplier-method iteration at the penalty carried by `p`:
/// minimize the augmented Lagrangian over `x`, evaluate the splitting
/// point `v = prox(E x + lambda/c)`, and take the multiplier step
/// `lambda += c (E x - v)`.
///
/// Returns the new pair and the primal residual `||E x - v||_inf`.
fn alm_outer_step(
    p: &Problem,
    pt: &PrimalDual,
    inner_tol: f64,
) -> Result<(PrimalDual, f64), OracleError> {
    let c = p.penalty();
    let x = minimize_lagrangian_in_x(p, &pt.lambda, &pt.x, inner_tol)?;
    let ex = p.map().matvec(&x).map_err(ProblemError::from)?;
    let z = &ex + &pt.lambda / c;
    let v = p.phi().prox(c, &z).map_err(ProblemError::from)?;
    let primal = &ex - &v;
    let lambda = &pt.lambda + c * &primal;
    Ok((PrimalDual::new(x, lambda), inf_norm(&primal)))
}

/// The classical first-order multiplier method, stopping on the combined
/// optimality residual. The penalty is multiplied by 10 whenever the
/// primal residual fails to shrink by 4x over a 10-iteration window.
///
/// The returned report carries the full residual history but only the
/// final iterate; first-order runs can span tens of thousands of
/// iterations.
pub fn alm_first_order(
    p: &Problem,
    start: &PrimalDual,
    cfg: &OracleConfig,
) -> Result<SolveReport, OracleError> {
    let mut c = cfg.c;
    let mut p_c = p.with_penalty(c)?;
    let mut pt = start.clone();
    let mut residual_norms = vec![combined_kkt_residual(&p_c, &pt)?];
    let mut ratios = Vec::new();
    let mut primal_window: Vec<f64> = Vec::new();
    let mut iterations = 0usize;
    let inner_tol = (cfg.tol * 0.1).max(1e-14);

    let status = loop {
        let rk = *residual_norms.last().unwrap();
        if rk <= cfg.tol {
            break SolveStatus::Converged;
        }
        if iterations >= cfg.max_iter {
            break SolveStatus::MaxIterations;
        }

        let (next, primal) = alm_outer_step(&p_c, &pt, inner_tol)?;
        pt = next;

        let r = combined_kkt_residual(&p_c, &pt)?;
        ratios.push(r / rk);
        residual_norms.push(r);
        iterations += 1;

        primal_window.push(primal);
        if primal_window.len() >= 10 {
            let old = primal_window[primal_window.len() - 10];
            let new = *primal_window.last().unwrap();
            if new > 0.25 * old && c < MAX_PENALTY {
                c = (c * 10.0).min(MAX_PENALTY);
                p_c = p.with_penalty(c)?;
                primal_window.clear();
            }
        }
    };

    Ok(SolveReport {
        status,
        iterates: vec![pt],
        residual_norms,
        ratios,
        iterations,
        active_set_history: Vec::new(),
    })
}

/// Run a fixed number of multiplier-method iterations at the oracle's own
/// default penalty. Used as the warm start of the Newton solve; running
/// at a fixed moderate penalty keeps the entry point independent of the
/// penalty the Newton iteration is configured with.
pub fn alm_warm_start(
    p: &Problem,
    start: &PrimalDual,
    steps: usize,
) -> Result<PrimalDual, OracleError> {
    let p = p.with_penalty(OracleConfig::default().c)?;
    let mut pt = start.clone();
    // basin entry needs a decent point, not a solution; a loose inner
    // tolerance keeps the warm start cheap
    for _ in 0..steps {
        let (next, _) = alm_outer_step(&p, &pt, 1e-6)?;
        pt = next;
    }
    Ok(pt)
}

/// Forward-backward splitting with backtracking, valid only for `E = I`.
/// Stops when the prox-gradient fixed-point residual
/// `||x - prox(x - s grad f)||_inf / s` drops below `cfg.tol`; that bound
/// controls the per-step objective decrease, which f64 cannot resolve
/// directly at the required accuracy.
pub fn prox_gradient(
    p: &Problem,
    start_x: &DVector<f64>,
    cfg: &OracleConfig,
) -> Result<DVector<f64>, OracleError> {
    if !p.map().is_identity() {
        return Err(OracleError::RequiresIdentityMap);
    }
    let mut x = start_x.clone();
    if x.len() != p.primal_dim() {
        return Err(OracleError::Problem(ProblemError::PrimalDimension {
            expected: p.primal_dim(),
            actual: x.len(),
        }));
    }
    let mut s = 1.0_f64;
    for _ in 0..cfg.max_iter {
        let g = p.smooth().gradient(&x);
        let fx = p.smooth().value(&x);
        let cand = loop {
            let cand = p
                .phi()
                .prox(1.0 / s, &(&x - s * &g))
                .map_err(ProblemError::from)?;
            let dx = &cand - &x;
            let quad = fx + g.dot(&dx) + dx.norm_squared() / (2.0 * s);
            if p.smooth().value(&cand) <= quad + 1e-12 * (1.0 + fx.abs()) {
                break cand;
            }
            s *= 0.5;
            if s < 1e-16 {
                break cand;
            }
        };
        let step_res = inf_norm(&(&cand - &x)) / s;
        x = cand;
        if step_res <= cfg.tol {
            return Ok(x);
        }
        s = (s * 1.5).min(1e6);
    }
    Err(OracleError::MaxIterations)
}

/// Axis-aligned search region for [`brute_force_kkt`].
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points_per_axis: usize) -> Self {
        Self {
            lower,
            upper,
            points_per_axis,
        }
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_refine(
    f: &dyn Fn(&DVector<f64>) -> f64,
    x: &mut DVector<f64>,
    axis: usize,
    half_width: f64,
) {
    let base = x.clone();
    let slice = |t: f64| {
        let mut y = base.clone();
        y[axis] += t;
        f(&y)
    };
    let mut a = -half_width;
    let mut b = half_width;
    let mut c1 = b - GOLDEN * (b - a);
    let mut c2 = a + GOLDEN * (b - a);
    let mut f1 = slice(c1);
    let mut f2 = slice(c2);
    for _ in 0..90 {
        if f1 <= f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - GOLDEN * (b - a);
            f1 = slice(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + GOLDEN * (b - a);
            f2 = slice(c2);
        }
    }
    let t = if f1 <= f2 { c1 } else { c2 };
    x[axis] += t;
}

/// Ground-truth generator at toy scale: scan the composite objective over
/// a grid, refine coordinate-wise by golden section, and reconstruct the
/// multiplier from the stationarity equation by least squares.
pub fn brute_force_kkt(p: &Problem, grid: &GridSpec) -> Result<PrimalDual, OracleError> {
    let n = p.primal_dim();
    let m = p.dual_dim();
    if n > 2 || m > 2 {
        return Err(OracleError::TooLarge { n, m });
    }
    if grid.lower.len() != n || grid.upper.len() != n {
        return Err(OracleError::InvalidGrid(format!(
            "grid bounds must have length {n}"
        )));
    }
    if grid.points_per_axis < 2 {
        return Err(OracleError::InvalidGrid(
            "need at least 2 points per axis".into(),
        ));
    }
    for j in 0..n {
        if !(grid.lower[j] < grid.upper[j]) {
            return Err(OracleError::InvalidGrid(format!(
                "axis {j} has empty range [{}, {}]",
                grid.lower[j], grid.upper[j]
            )));
        }
    }

    let objective = |x: &DVector<f64>| -> f64 {
        p.objective(x).unwrap_or(f64::INFINITY)
    };

    let pts = grid.points_per_axis;
    let coord = |j: usize, k: usize| {
        grid.lower[j] + (grid.upper[j] - grid.lower[j]) * (k as f64) / ((pts - 1) as f64)
    };
    let total: usize = pts.pow(n as u32);
    let mut best = f64::INFINITY;
    let mut best_x = DVector::zeros(n);
    let mut cells: Vec<(f64, DVector<f64>)> = Vec::with_capacity(total);
    for flat in 0..total {
        let mut x = DVector::zeros(n);
        let mut rem = flat;
        for j in 0..n {
            x[j] = coord(j, rem % pts);
            rem /= pts;
        }
        let v = objective(&x);
        if v < best {
            best = v;
            best_x = x.clone();
        }
        cells.push((v, x));
    }
    if !best.is_finite() {
        return Err(OracleError::InvalidGrid(
            "objective is infinite on the whole grid".into(),
        ));
    }

    // two near-optimal cells far apart signal a non-unique minimizer
    let span = (0..n)
        .map(|j| grid.upper[j] - grid.lower[j])
        .fold(0.0_f64, f64::max);
    let value_tol = 1e-8 * (1.0 + best.abs());
    for (v, x) in &cells {
        if *v <= best + value_tol && inf_norm(&(x - &best_x)) > 0.1 * span {
            return Err(OracleError::AmbiguousMinimizer);
        }
    }

    let mut x = best_x;
    let step = (0..n)
        .map(|j| (grid.upper[j] - grid.lower[j]) / ((pts - 1) as f64))
        .fold(0.0_f64, f64::max);
    for _ in 0..4 {
        for j in 0..n {
            golden_refine(&objective, &mut x, j, 1.5 * step);
        }
    }

    // lambda from E^T lambda = -grad f(x) by least squares on the normal
    // equations (m <= 2)
    let ed = p.map().to_dense();
    let g = p.smooth().gradient(&x);
    let lhs = &ed * ed.transpose();
    let rhs = -(&ed * &g);
    let lambda = lhs
        .full_piv_lu()
        .solve(&rhs)
        .ok_or_else(|| OracleError::InnerSolve("multiplier least squares is singular".into()))?;
    Ok(PrimalDual::new(x, lambda))
}
