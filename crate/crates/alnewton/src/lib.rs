//! Newton-type solver for nonsmooth composite convex problems
//!
//! ```text
//! min over x in R^n   of   f(x) + phi(E x)
//! ```
//!
//! where `f` is smooth and convex, `E` is a linear map into `R^m`, and
//! `phi` is a separable convex function with a closed-form proximity
//! operator (box indicator or weighted l1 norm).
//!
//! The approach: the augmented Lagrangian
//! `L_c(x, lambda) = f(x) + phi_c(E x + lambda/c) - ||lambda||^2/(2c)`
//! is differentiable in both variables even though `phi` is not, and its
//! stationary pairs are exactly the solutions paired with their
//! multipliers — for every penalty `c > 0`. The solver applies a linear
//! Newton method to that stationarity system, replacing the missing
//! second derivative of the Moreau envelope with an element of the
//! limiting Jacobian of the proximity operator. For the two supported
//! `phi` kinds that element is a diagonal 0/1 selector, and the Newton
//! step reduces to a primal-dual active-set update with finite local
//! termination on quadratic objectives.
//!
//! # Modules
//!
//! - [`prox`] — proximity operators, Moreau envelopes, limiting Jacobians
//! - [`lagrangian`] — problem data, the augmented Lagrangian and its
//!   gradients, optimality residuals
//! - [`newton`] — the saddle-point Newton systems, the three update
//!   formulations, the outer iteration
//! - [`oracle`] — independent first-order solvers and a brute-force
//!   verifier used for validation
//! - [`problem_io`] — matrix/vector text formats and the TOML problem
//!   schema
//! - [`bench`] — seeded random instance generation
//! - [`report`], [`cli`] — report rendering and the command-line drivers
//!
//! # Examples directory
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release -p alnewton --example prox_basics
//! cargo run --release -p alnewton --example lagrangian_identities
//! cargo run --release -p alnewton --example toy_problems
//! cargo run --release -p alnewton --example formulations
//! cargo run --release -p alnewton --example qp_box_active_set
//! cargo run --release -p alnewton --example qp_l1_soft_threshold
//! cargo run --release -p alnewton --example oracle_crosscheck
//! cargo run --release -p alnewton --example problem_files
//! ```
//!
//! A thin binary exposes the same machinery as `solve`, `check` and
//! `bench` subcommands; see the README for flags and exit codes.

// validation guards use `!(v > 0.0)` on purpose: the negation rejects
// NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod lagrangian;
pub mod linalg;
pub mod newton;
pub mod oracle;
pub mod problem_io;
pub mod prox;
pub mod report;

pub use lagrangian::{
    PrimalDual, Problem, ProblemError, QuadraticObjective, SeparableExpObjective, SmoothObjective,
};
pub use linalg::LinearMap;
pub use newton::{
    Formulation, NewtonConfig, NewtonError, SolveReport, SolveStatus,
};
pub use oracle::{GridSpec, OracleConfig, OracleError};
pub use prox::{ExtendedReal, JacobianElement, ProxFunction, TieRule};
