//! Proximity operators, Moreau envelopes and limiting-Jacobian elements
//! for the separable convex functions handled by the solver.
//!
//! Two function classes are supported: the indicator of a coordinate box
//! (bilateral inequality constraints, possibly unbounded on either side)
//! and a weighted l1 norm. Both have closed-form proximity operators whose
//! limiting Jacobians are diagonal 0/1 selector matrices, which is what the
//! active-set Newton updates exploit.
//!
//! Values of the box indicator are extended reals; [`ExtendedReal`] keeps
//! the infinite case an explicit marker instead of a floating overflow.

use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProxError {
    #[error("vector has length {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("penalty parameter c must be positive, got {0}")]
    NonPositivePenalty(f64),
    #[error("l1 weight alpha must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("box component {index} is empty: lower = {lower}, upper = {upper}")]
    EmptyBox {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("box bounds have mismatched lengths {lower_len} and {upper_len}")]
    BoundLengths { lower_len: usize, upper_len: usize },
    #[error("jacobian diagonal entry {index} must be exactly 0 or 1, got {value}")]
    NonBinaryJacobianEntry { index: usize, value: f64 },
}

/// Value of an extended-real-valued convex function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(*v),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// Collapse to `f64`, mapping the infinite marker to `f64::INFINITY`.
    pub fn as_f64(&self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => *v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }
}

/// Selection rule at points where the limiting Jacobian of the proximity
/// operator contains both 0 and 1 (box bounds hit exactly, l1 components
/// exactly at the threshold).
///
/// `PreferZero` treats such components as active, matching the usual
/// primal-dual active-set convention, and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    #[default]
    PreferZero,
    PreferOne,
}

/// A separable convex function with a closed-form proximity operator.
#[derive(Debug, Clone)]
pub enum ProxFunction {
    /// Indicator of `{ z : lower <= z <= upper }` componentwise; entries of
    /// `lower` may be `-inf` and entries of `upper` may be `+inf`.
    BoxIndicator {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    /// `z -> alpha * sum_j |z_j|` with `alpha > 0`.
    L1Norm { alpha: f64, dim: usize },
}

impl ProxFunction {
    pub fn box_indicator(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self, ProxError> {
        if lower.len() != upper.len() {
            return Err(ProxError::BoundLengths {
                lower_len: lower.len(),
                upper_len: upper.len(),
            });
        }
        for j in 0..lower.len() {
            let (lo, up) = (lower[j], upper[j]);
            // the interval must contain at least one real point
            if lo.is_nan() || up.is_nan() || lo > up || lo == f64::INFINITY || up == f64::NEG_INFINITY
            {
                return Err(ProxError::EmptyBox {
                    index: j,
                    lower: lo,
                    upper: up,
                });
            }
        }
        Ok(ProxFunction::BoxIndicator { lower, upper })
    }

    pub fn l1(alpha: f64, dim: usize) -> Result<Self, ProxError> {
        if !(alpha > 0.0) {
            return Err(ProxError::NonPositiveWeight(alpha));
        }
        Ok(ProxFunction::L1Norm { alpha, dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            ProxFunction::BoxIndicator { lower, .. } => lower.len(),
            ProxFunction::L1Norm { dim, .. } => *dim,
        }
    }

    fn check_dim(&self, z: &DVector<f64>) -> Result<(), ProxError> {
        if z.len() != self.dim() {
            return Err(ProxError::DimensionMismatch {
                expected: self.dim(),
                actual: z.len(),
            });
        }
        Ok(())
    }

    fn check_penalty(c: f64) -> Result<(), ProxError> {
        if !(c > 0.0) {
            return Err(ProxError::NonPositivePenalty(c));
        }
        Ok(())
    }

    /// Direct evaluation of the function itself.
    pub fn eval(&self, z: &DVector<f64>) -> Result<ExtendedReal, ProxError> {
        self.check_dim(z)?;
        match self {
            ProxFunction::BoxIndicator { lower, upper } => {
                for j in 0..z.len() {
                    if z[j] < lower[j] || z[j] > upper[j] {
                        return Ok(ExtendedReal::PosInfinity);
                    }
                }
                Ok(ExtendedReal::Finite(0.0))
            }
            ProxFunction::L1Norm { alpha, .. } => {
                Ok(ExtendedReal::Finite(alpha * z.iter().map(|v| v.abs()).sum::<f64>()))
            }
        }
    }

    /// The proximity operator `argmin_u phi(u) + (c/2) ||u - z||^2`.
    ///
    /// Box: componentwise clamp onto the interval. L1: componentwise
    /// soft-thresholding at level `alpha / c`.
    pub fn prox(&self, c: f64, z: &DVector<f64>) -> Result<DVector<f64>, ProxError> {
        Self::check_penalty(c)?;
        self.check_dim(z)?;
        Ok(match self {
            ProxFunction::BoxIndicator { lower, upper } => {
                DVector::from_fn(z.len(), |j, _| z[j].max(lower[j]).min(upper[j]))
            }
            ProxFunction::L1Norm { alpha, .. } => {
                let t = alpha / c;
                DVector::from_fn(z.len(), |j, _| (z[j] - t).max((z[j] + t).min(0.0)))
            }
        })
    }

    /// The Moreau envelope `min_u phi(u) + (c/2) ||u - z||^2`, evaluated as
    /// `phi(p) + (c/2) ||p - z||^2` at `p = prox(c, z)`. Always finite.
    pub fn moreau(&self, c: f64, z: &DVector<f64>) -> Result<f64, ProxError> {
        let p = self.prox(c, z)?;
        let phi_p = self
            .eval(&p)?
            .finite()
            .expect("proximity operator output lies in the domain");
        Ok(phi_p + 0.5 * c * (&p - z).norm_squared())
    }

    /// Gradient of the Moreau envelope, `c (z - prox(c, z))`. Lipschitz in
    /// `z` with constant `c`.
    pub fn moreau_grad(&self, c: f64, z: &DVector<f64>) -> Result<DVector<f64>, ProxError> {
        let p = self.prox(c, z)?;
        Ok(c * (z - p))
    }

    /// Proximity operator of the convex conjugate at the rescaled point:
    /// `prox_{c phi*}(c z)`, computed through the Moreau decomposition
    /// `prox_{phi/c}(z) + (1/c) prox_{c phi*}(c z) = z`. No explicit
    /// conjugate formula is used anywhere.
    pub fn prox_conjugate(&self, c: f64, z: &DVector<f64>) -> Result<DVector<f64>, ProxError> {
        self.moreau_grad(c, z)
    }

    /// One element of the limiting Jacobian of `prox(c, .)` at `z`.
    ///
    /// Both supported functions have separable proximity operators, so the
    /// element is a diagonal 0/1 matrix; `tie_rule` selects the value on the
    /// measure-zero set where the limiting Jacobian is `{0, 1}`.
    pub fn jacobian_element(
        &self,
        c: f64,
        z: &DVector<f64>,
        tie_rule: TieRule,
    ) -> Result<JacobianElement, ProxError> {
        Self::check_penalty(c)?;
        self.check_dim(z)?;
        let tie = match tie_rule {
            TieRule::PreferZero => 0.0,
            TieRule::PreferOne => 1.0,
        };
        let diag = match self {
            ProxFunction::BoxIndicator { lower, upper } => (0..z.len())
                .map(|j| {
                    if z[j] > lower[j] && z[j] < upper[j] {
                        1.0
                    } else if lower[j] == upper[j] {
                        // pinned interval: the prox is constant, so the
                        // limiting Jacobian is {0} regardless of ties
                        0.0
                    } else if z[j] == lower[j] || z[j] == upper[j] {
                        tie
                    } else {
                        0.0
                    }
                })
                .collect(),
            ProxFunction::L1Norm { alpha, .. } => {
                let t = alpha / c;
                (0..z.len())
                    .map(|j| {
                        let a = z[j].abs();
                        if a > t {
                            1.0
                        } else if a == t {
                            tie
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
        };
        JacobianElement::from_diag(diag)
    }
}

/// Diagonal of a selected element of the limiting Jacobian of a separable
/// proximity operator. Entries are exactly 0 or 1, so the matrix is
/// symmetric positive semidefinite with norm at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianElement {
    diag: Vec<f64>,
}

impl JacobianElement {
    pub fn from_diag(diag: Vec<f64>) -> Result<Self, ProxError> {
        for (index, &value) in diag.iter().enumerate() {
            if value != 0.0 && value != 1.0 {
                return Err(ProxError::NonBinaryJacobianEntry { index, value });
            }
        }
        Ok(Self { diag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn is_one(&self, j: usize) -> bool {
        self.diag[j] == 1.0
    }

    /// Indices where the diagonal is zero (the active/thresholded set).
    pub fn zero_set(&self) -> Vec<usize> {
        (0..self.diag.len()).filter(|&j| self.diag[j] == 0.0).collect()
    }

    /// Indices where the diagonal is one (the inactive/free set).
    pub fn one_set(&self) -> Vec<usize> {
        (0..self.diag.len()).filter(|&j| self.diag[j] == 1.0).collect()
    }
}
