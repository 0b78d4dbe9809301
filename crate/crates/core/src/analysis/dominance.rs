use super::AnalysisError;
use crate::objectives::Objective;
use crate::Vector;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// `h(θ) = 2 sin(½ arcsin θ)`, the chord subtending an arc whose sine is `θ`.
///
/// Evaluated as `√2 θ / √(1 + √(1 − θ²))`, which is exact at `θ = 1` and
/// free of cancellation near `0`.
pub fn chord_of_arcsin(theta: f64) -> f64 {
    SQRT_2 * theta / (1.0 + (1.0 - theta * theta).sqrt()).sqrt()
}

/// `h(θ)/θ`, increasing from 1 at `θ = 0` to `√2` at `θ = 1`.
fn chord_ratio(theta: f64) -> f64 {
    SQRT_2 / (1.0 + (1.0 - theta * theta).sqrt()).sqrt()
}

/// `θ_m` with `h(θ_m)/θ_m = m` for `m ∈ (1, √2]`, and 1 for `m > √2`.
pub fn dominance_threshold(m: f64) -> Result<f64, AnalysisError> {
    if m.is_nan() || m <= 1.0 {
        return Err(AnalysisError::DominanceTooWeak(m));
    }
    if m >= SQRT_2 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if chord_ratio(mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Local contraction factor `h(θ)/(θ m)` of full-step Frank-Wolfe near a
/// minimizer with `‖f′(x*)‖ ≥ m r L₁`, for `θ ∈ (0, θ_m)` (`(0, 1]` when
/// `m > √2`).
pub fn ffw_local_rate(m: f64, theta: f64) -> Result<f64, AnalysisError> {
    let max = dominance_threshold(m)?;
    let inside = if m > SQRT_2 { theta <= max } else { theta < max };
    if !(theta > 0.0 && inside) {
        return Err(AnalysisError::ThetaOutOfRange { theta, max });
    }
    Ok(chord_ratio(theta) / m)
}

/// `m̂ = min ‖f′(x)‖ / (r L₁)` over `points`; infinite when `L₁ = 0`.
pub fn dominance_estimate<'a>(points: impl IntoIterator<Item = &'a Vector>, obj: &dyn Objective, radius: f64) -> f64 {
    let scale = radius * obj.grad_lipschitz();
    points
        .into_iter()
        .map(|x| obj.gradient(x).norm() / scale)
        .fold(f64::INFINITY, f64::min)
}
