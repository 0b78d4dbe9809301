//! Closed-form constants from the convergence theory, for comparison with
//! trace headers and observed sequences.

use crate::Vector;

/// LPL constant `μ = 4τ²(λ₂ − λ₁)` of `(Ax, x)` on `{|(x, e₁)| ≥ τ}`.
pub fn quadratic_lpl_mu(tau: f64, lambda1: f64, lambda2: f64) -> f64 {
    4.0 * tau * tau * (lambda2 - lambda1)
}

/// Global rate `q = 1 − τ²(λ₂ − λ₁)/(λₙ − λ₁)` of the eigenvalue iteration.
pub fn eigen_global_rate(tau: f64, lambda1: f64, lambda2: f64, lambda_n: f64) -> f64 {
    1.0 - tau * tau * (lambda2 - lambda1) / (lambda_n - lambda1)
}

/// Asymptotic rate `q₁ = (λₙ − λ₂)/(λₙ − λ₁)`.
pub fn eigen_asymptotic_rate(lambda1: f64, lambda2: f64, lambda_n: f64) -> f64 {
    (lambda_n - lambda2) / (lambda_n - lambda1)
}

/// Per-step factor `1 − μ/(2‖L₁x − f′(x)‖)` of the sphere iteration.
pub fn sphere_step_factor(mu: f64, l1: f64, x: &Vector, grad: &Vector) -> f64 {
    1.0 - mu / (2.0 * (x * l1 - grad).norm())
}

/// Rate `L₁/(‖f′(0)‖ − L₁)` of full-step Frank-Wolfe on the unit sphere for
/// approximately linear objectives.
pub fn approx_linear_rate(l1: f64, grad_at_origin: f64) -> f64 {
    l1 / (grad_at_origin - l1)
}

/// Guaranteed decrease factor `q(t) = t − t²(L₁/2 + L/R)` of the
/// tangent-plane step.
pub fn tangent_decrease_factor(t: f64, l1: f64, l: f64, reach: f64) -> f64 {
    t - t * t * (0.5 * l1 + l / reach)
}

/// Step threshold `δ = ε/(C + 2L₁)` of the stationary-point driver.
pub fn stationary_delta(eps: f64, c: f64, l1: f64) -> f64 {
    eps / (c + 2.0 * l1)
}

/// Step count bound `⌊2Δf/(Cδ²)⌋ + 1`.
pub fn stationary_step_bound(delta_f: f64, c: f64, delta: f64) -> f64 {
    (2.0 * delta_f / (c * delta * delta)).floor() + 1.0
}

/// Gradient-phase threshold `σ₁²/(4L₁)` for switching to Newton steps.
pub fn newton_switch_threshold(sigma1: f64, l1: f64) -> f64 {
    sigma1 * sigma1 / (4.0 * l1)
}

/// Per-iteration factor `r L₁ / m` of full-step Frank-Wolfe on a strongly
/// convex boundary of radius `r` when `‖f′‖ ≥ m` throughout.
pub fn strongly_convex_ffw_rate(radius: f64, l1: f64, grad_lower: f64) -> f64 {
    radius * l1 / grad_lower
}
