//! Certification of runs against the convergence theory: fitted geometric
//! rates, LPL constants and exponents, stationarity distances, the local
//! rate of full-step Frank-Wolfe and closed-form rate constants.

mod dominance;
mod lpl;
mod rate;
pub mod theory;

use thiserror::Error;

use crate::geometry::{distance_to_normal_ray, GeometryError, Surface};
use crate::objectives::Objective;
use crate::Vector;

pub use dominance::{chord_of_arcsin, dominance_estimate, dominance_threshold, ffw_local_rate};
pub use lpl::{circle_path, lpl_exponent_estimate, lpl_mu_estimate, ExponentEstimate, LplEstimate, LplSampling, LPL_GAP_FLOOR};
pub use rate::{check_geometric_envelope, check_rate_bound, check_rate_bound_above, fit_linear_rate, log_log_slope, RateCheck, RateReport, RATE_UNDERFLOW};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("sequence too short: {len} usable entries, need at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("value at index {index} is not positive: {value}")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("no samples fall in the level set above the ratio floor")]
    NoSamplesInLevel,
    #[error("f - f0 spans only {decades:.2} decades along the path, need at least 3")]
    InsufficientRange { decades: f64 },
    #[error("dominance constant m = {0} must exceed 1")]
    DominanceTooWeak(f64),
    #[error("theta = {theta} outside (0, {max})")]
    ThetaOutOfRange { theta: f64, max: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Distance from `−f′(x)` to the normal cone at `x`: `‖P_{T_x} f′(x)‖` when
/// the cone is a line, the distance to the outward ray on ball boundaries.
pub fn stationarity_distance(surface: &Surface, obj: &dyn Objective, x: &Vector) -> Result<f64, AnalysisError> {
    let p = surface.unit_normal(x)?;
    let g = obj.gradient(x);
    Ok(if surface.normal_cone_is_ray() {
        distance_to_normal_ray(&p, &g)
    } else {
        (&g - &p * p.dot(&g)).norm()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphereSurface;
    use crate::objectives::{problems, Linear, QuadraticForm};
    use nalgebra::dvector;

    #[test]
    fn stationarity_examples() {
        let s = Surface::Sphere(SphereSurface::unit(2));
        let q = QuadraticForm::diagonal(&[1.0, 2.0]).unwrap();
        assert_eq!(stationarity_distance(&s, &q, &dvector![1.0, 0.0]).unwrap(), 0.0);

        let p = problems::minstat(2.0).unwrap();
        assert_eq!(stationarity_distance(&p.surface, p.objective.as_ref(), &dvector![0.0, 0.0]).unwrap(), 0.0);

        let c = dvector![0.0, 3.0];
        assert_eq!(stationarity_distance(&s, &Linear::new(c), &dvector![1.0, 0.0]).unwrap(), 3.0);

        assert!(matches!(
            stationarity_distance(&s, &q, &dvector![0.5, 0.0]),
            Err(AnalysisError::Geometry(GeometryError::OffSurface { .. }))
        ));
    }

    #[test]
    fn registered_minimizers_are_stationary() {
        for id in problems::REGISTERED_IDS {
            let p = problems::lookup(id).unwrap();
            if let Some(m) = &p.minimizer {
                let d = stationarity_distance(&p.surface, p.objective.as_ref(), m).unwrap();
                assert!(d <= 1e-10, "{id}: {d}");
            }
        }
    }
}
