//! First-order optimization under generalized smoothness.
//!
//! The crate centers on objectives whose Hessian norm is controlled by an
//! affine function of the gradient norm, `‖∇²f(x)‖ ≤ L0 + L1·‖∇f(x)‖`,
//! rather than a single global Lipschitz constant.  It provides:
//!
//! - analytic objective oracles (powers of the norm, exponentials, logistic
//!   regression, shared-minimum quartics) with their smoothness constants,
//! - numeric certificates that the generalized-smoothness inequalities hold
//!   on sampled point pairs, plus an envelope fitter for `(L0, L1)`,
//! - deterministic solvers: gradient descent with the gradient-clipped
//!   stepsize, Polyak stepsizes, a similar-triangles accelerated method, and
//!   an adaptive gradient method with curvature-ratio stepsizes,
//! - stochastic variants driven by a counter-based RNG (bitwise reproducible),
//! - convergence diagnostics that evaluate the methods' a-priori bounds and
//!   per-step invariants against recorded traces,
//! - a small CLI (`gensmooth`) that runs experiment specs and verifies them.

pub mod cli;
pub mod diagnostics;
pub mod libsvm;
pub mod optimizers;
pub mod problems;
pub mod scalar;
pub mod stochastic;
pub mod verifier;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric evaluation produced a non-finite value.
    #[error("non-finite value during evaluation: {0}")]
    NonFinite(String),
    /// Text input (dataset, CSV) could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A run or experiment configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),
    /// An experiment spec violated the schema; `pointer` is a JSON pointer.
    #[error("spec error at {pointer}: {msg}")]
    Spec { pointer: String, msg: String },
    /// The supplied optimum is inconsistent with observed function values.
    #[error("inconsistent optimum: observed f(x) = {observed} below declared f* = {declared}")]
    InconsistentOptimum { observed: f64, declared: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
