use super::rate::least_squares;
use super::AnalysisError;
use crate::geometry::Surface;
use crate::objectives::Objective;
use crate::sampling::QuasiSphere;
use crate::Vector;

/// Samples with `f − f₀ ≤ 1e-12 · (1 + |f₀|)` are excluded; the ratio is
/// `0/0` at the minimizer.
pub const LPL_GAP_FLOOR: f64 = 1e-12;

/// Directions drawn per requested sample before giving up on a sparse
/// region.
const DRAW_BUDGET: usize = 100;

/// Sampling plan for [`lpl_mu_estimate`].
pub struct LplSampling<'a> {
    pub alpha: f64,
    /// Level cap: only points with `f(x) ≤ beta` are used.
    pub beta: f64,
    /// Number of accepted samples to collect.
    pub n_samples: usize,
    pub seed: u64,
    /// Optional additional restriction of the sampled region.
    pub region: Option<&'a dyn Fn(&Vector) -> bool>,
}

impl<'a> LplSampling<'a> {
    pub fn new(alpha: f64, n_samples: usize, seed: u64) -> Self {
        Self {
            alpha,
            beta: f64::INFINITY,
            n_samples,
            seed,
            region: None,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn within(mut self, region: &'a dyn Fn(&Vector) -> bool) -> Self {
        self.region = Some(region);
        self
    }
}

/// Smallest observed ratio `‖P_{T_x} f′(x)‖^α / (f(x) − f₀)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LplEstimate {
    pub mu_hat: f64,
    pub alpha: f64,
    /// Accepted samples.
    pub n_samples: usize,
    pub worst_point: Vector,
    pub beta: f64,
}

/// Estimates the LPL constant `μ` from quasi-random surface samples in the
/// level set `f ≤ β`, optionally restricted further by `plan.region`.
///
/// Directions are drawn until `n_samples` points are accepted or
/// `100 · n_samples` directions have been tried.
pub fn lpl_mu_estimate(surface: &Surface, obj: &dyn Objective, f0: f64, plan: &LplSampling<'_>) -> Result<LplEstimate, AnalysisError> {
    let floor = LPL_GAP_FLOOR * (1.0 + f0.abs());
    let mut accepted = 0;
    let mut best: Option<(f64, Vector)> = None;
    for u in QuasiSphere::new(surface.dim(), plan.seed).take(plan.n_samples.saturating_mul(DRAW_BUDGET)) {
        if accepted == plan.n_samples {
            break;
        }
        let x = surface.point_in_direction(&u)?;
        if plan.region.is_some_and(|r| !r(&x)) {
            continue;
        }
        let (f, g) = obj.eval(&x);
        let gap = f - f0;
        if f > plan.beta || gap <= floor {
            continue;
        }
        accepted += 1;
        let pg = surface.tangent_project(&x, &g)?.norm();
        let ratio = pg.powf(plan.alpha) / gap;
        if best.as_ref().is_none_or(|(b, _)| ratio < *b) {
            best = Some((ratio, x));
        }
    }
    let (mu_hat, worst_point) = best.ok_or(AnalysisError::NoSamplesInLevel)?;
    Ok(LplEstimate {
        mu_hat,
        alpha: plan.alpha,
        n_samples: accepted,
        worst_point,
        beta: plan.beta,
    })
}

/// Fitted LPL exponent along a path into the minimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentEstimate {
    pub alpha_hat: f64,
    /// Decades spanned by `f − f₀` over the used points.
    pub decades: f64,
    pub points_used: usize,
}

/// Slope of `log(f − f₀)` against `log ‖P_T f′‖` along `path`, so that
/// `‖P_T f′‖^α ≍ f − f₀`. Points at or below the gap floor are skipped;
/// the remaining gaps must span at least 3 decades.
pub fn lpl_exponent_estimate(surface: &Surface, obj: &dyn Objective, f0: f64, path: &[Vector]) -> Result<ExponentEstimate, AnalysisError> {
    let floor = LPL_GAP_FLOOR * (1.0 + f0.abs());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for x in path {
        let (f, g) = obj.eval(x);
        let gap = f - f0;
        let pg = surface.tangent_project(x, &g)?.norm();
        if gap > floor && pg > 0.0 {
            xs.push(pg.ln());
            ys.push(gap.ln());
        }
    }
    let decades = if ys.is_empty() {
        0.0
    } else {
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        (hi - lo) / std::f64::consts::LN_10
    };
    if ys.len() < 3 || decades < 3.0 {
        return Err(AnalysisError::InsufficientRange { decades });
    }
    let (slope, _) = least_squares(&xs, &ys);
    Ok(ExponentEstimate {
        alpha_hat: slope,
        decades,
        points_used: xs.len(),
    })
}

/// Points of the circle with the given center and radius at angles
/// `θ_j = θ₀ ρʲ`, `j < count`, measured from the bottom point
/// `center − radius e₂`.
///
/// The height above the bottom is computed as `2r sin²(θ/2)` to avoid
/// cancellation at small angles.
pub fn circle_path(center: &Vector, radius: f64, start_angle: f64, ratio: f64, count: usize) -> Vec<Vector> {
    (0..count)
        .map(|j| {
            let theta = start_angle * ratio.powi(j as i32);
            let rise = 2.0 * radius * (0.5 * theta).sin().powi(2);
            Vector::from_vec(vec![center[0] + radius * theta.sin(), center[1] - radius + rise])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphereSurface;
    use crate::objectives::{problems, Linear, QuadraticForm};
    use nalgebra::dvector;

    #[test]
    fn quadratic_bound_on_half_overlap_cap() {
        let q = QuadraticForm::diagonal(&[1.0, 2.0, 10.0]).unwrap();
        let s = Surface::Sphere(SphereSurface::unit(3));
        let cap = |x: &Vector| x[0] >= 0.5;
        let est = lpl_mu_estimate(&s, &q, 1.0, &LplSampling::new(2.0, 2000, 4).within(&cap)).unwrap();
        assert_eq!(est.n_samples, 2000);
        assert!(est.mu_hat >= 1.0 - 1e-9, "{}", est.mu_hat);
    }

    #[test]
    fn repeated_smallest_eigenvalue_uses_next_gap() {
        // λ₁ = λ₂ = 1 < λ₃ = 3 on {x₁² + x₂² ≥ τ²}: μ = 4τ²(λ₃ − λ₁)
        let q = QuadraticForm::diagonal(&[1.0, 1.0, 3.0]).unwrap();
        let s = Surface::Sphere(SphereSurface::unit(3));
        let tau = 0.5;
        let cap = |x: &Vector| x[0] * x[0] + x[1] * x[1] >= tau * tau;
        let est = lpl_mu_estimate(&s, &q, 1.0, &LplSampling::new(2.0, 5000, 9).within(&cap)).unwrap();
        assert!(est.mu_hat >= 4.0 * tau * tau * 2.0 - 1e-9, "{}", est.mu_hat);
    }

    #[test]
    fn linear_objective_gives_positive_finite_constant() {
        let s = Surface::Sphere(SphereSurface::unit(3));
        let obj = Linear::new(dvector![0.0, 0.0, 1.0]);
        let near = |x: &Vector| x[2] <= -0.9;
        let est = lpl_mu_estimate(&s, &obj, -1.0, &LplSampling::new(2.0, 500, 1).within(&near)).unwrap();
        assert!(est.mu_hat > 0.0 && est.mu_hat.is_finite());
    }

    #[test]
    fn empty_level_is_reported() {
        let s = Surface::Sphere(SphereSurface::unit(3));
        let obj = Linear::new(dvector![0.0, 0.0, 1.0]);
        let plan = LplSampling::new(2.0, 100, 1).with_beta(-1.0 + 1e-13);
        assert_eq!(lpl_mu_estimate(&s, &obj, -1.0, &plan), Err(AnalysisError::NoSamplesInLevel));
    }

    #[test]
    fn exponents_of_parabolic_examples() {
        for (p, lo, hi) in [(0.5, 1.85, 2.15), (1.0, 1.23, 1.43)] {
            let problem = problems::lpl2d(p).unwrap();
            let path = circle_path(&dvector![0.0, 0.5], 0.5, 0.1, 0.8, 30);
            let est = lpl_exponent_estimate(&problem.surface, problem.objective.as_ref(), 0.0, &path).unwrap();
            assert!(est.alpha_hat >= lo && est.alpha_hat <= hi, "p = {p}: {}", est.alpha_hat);
        }
    }

    #[test]
    fn quadratic_exponent_is_two() {
        let q = QuadraticForm::diagonal(&[1.0, 2.0]).unwrap();
        let s = Surface::Sphere(SphereSurface::unit(2));
        let path: Vec<Vector> = (0..30).map(|j| {
            let a = 0.3 * 0.7f64.powi(j);
            dvector![a.cos(), a.sin()]
        }).collect();
        let est = lpl_exponent_estimate(&s, &q, 1.0, &path).unwrap();
        assert!((est.alpha_hat - 2.0).abs() <= 0.15, "{}", est.alpha_hat);
    }

    #[test]
    fn short_range_is_rejected() {
        let q = QuadraticForm::diagonal(&[1.0, 2.0]).unwrap();
        let s = Surface::Sphere(SphereSurface::unit(2));
        let path = vec![dvector![0.8, 0.6], dvector![0.6, 0.8]];
        assert!(matches!(
            lpl_exponent_estimate(&s, &q, 1.0, &path),
            Err(AnalysisError::InsufficientRange { .. })
        ));
    }
}
