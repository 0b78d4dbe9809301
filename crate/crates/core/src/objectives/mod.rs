//! Objective oracles with Lipschitz metadata.
//!
//! An [`Objective`] supplies `f`, `f′`, optionally `f″`, the Lipschitz
//! constant `L₁` of the gradient and, when known in closed form, the
//! Lipschitz constant `L` of `f` itself on the region of interest. When `L`
//! is not registered, [`value_lipschitz`] estimates it from surface samples.

mod functions;
pub mod problems;
mod quadratic;
mod spectrum;

use thiserror::Error;

use crate::geometry::{GeometryError, Surface};
use crate::{Matrix, Vector};

pub use functions::{ApproxLinear, FnObjective, Linear, MinStatObjective, ParabolicObjective, ShiftedSquare};
pub use quadratic::{parse_matrix, QuadraticForm};
pub use spectrum::{check_symmetric, quadratic_spectrum, Spectrum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix parse error on line {line}: {message}")]
    MatrixParse { line: usize, message: String },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error("invalid problem parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A smooth objective `f : ℝⁿ → ℝ`.
pub trait Objective: Send + Sync {
    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector;

    /// Hessian, when the objective is twice differentiable.
    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        None
    }

    fn has_hessian(&self) -> bool {
        false
    }

    /// Lipschitz constant `L₁` of the gradient.
    fn grad_lipschitz(&self) -> f64;

    /// Closed-form Lipschitz constant `L` of `f` on the region of interest.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// `(f(x), f′(x))` from one oracle call.
    fn eval(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.gradient(x))
    }
}

/// Number of surface samples used to estimate `L` when it is not registered.
pub const LIPSCHITZ_SAMPLES: usize = 10_000;

/// Safety factor applied to the sampled maximum of `‖f′‖`.
pub const LIPSCHITZ_SAFETY: f64 = 1.1;

/// The registered `L`, or `1.1 · max ‖f′‖` over `10⁴` quasi-random surface
/// samples (seed 0).
pub fn value_lipschitz(surface: &Surface, obj: &dyn Objective) -> Result<f64, GeometryError> {
    if let Some(l) = obj.lipschitz() {
        return Ok(l);
    }
    let max = surface
        .quasi_random_points(LIPSCHITZ_SAMPLES, 0)?
        .iter()
        .map(|x| obj.gradient(x).norm())
        .fold(0.0f64, f64::max);
    Ok(LIPSCHITZ_SAFETY * max)
}

/// Central-difference gradient check: returns
/// `maxᵢ |Dₕfᵢ − f′ᵢ| / max(1, ‖f′(x)‖)`.
pub fn fd_gradient_check(obj: &dyn Objective, x: &Vector, h: f64) -> f64 {
    let grad = obj.gradient(x);
    let denom = grad.norm().max(1.0);
    let mut worst = 0.0f64;
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = obj.value(&probe);
        probe[i] = x[i] - h;
        let down = obj.value(&probe);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / denom);
    }
    worst
}

/// Excess of the upper-bound inequality
/// `|f(y) − f(x) − (f′(x), y − x)| − (C/2)‖y − x‖²`; nonpositive when the
/// inequality holds.
pub fn descent_gap(obj: &dyn Objective, x: &Vector, y: &Vector, c: f64) -> f64 {
    let d = y - x;
    let lhs = (obj.value(y) - obj.value(x) - obj.gradient(x).dot(&d)).abs();
    lhs - 0.5 * c * d.norm_squared()
}
