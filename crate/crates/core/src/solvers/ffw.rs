use super::{Algorithm, IterationRecord, Recorder, SolverConfig, SolverError, Termination, Trace};
use crate::geometry::{distance_to_normal_ray, Surface};
use crate::objectives::Objective;
use crate::Vector;

/// Full-step Frank-Wolfe: `x_{k+1}` is the support point of the enclosed
/// ball in direction `−f′(x_k)`. On the unit sphere this is
/// `−f′(x_k)/‖f′(x_k)‖`.
///
/// A vanishing gradient ends the run with
/// [`Termination::StationaryCertificate`]. The `pg_tol` stop uses the
/// distance from `−f′` to the outward normal ray, since a point where `−f′`
/// points inward is not a fixed point of the method.
pub fn ffw_run(surface: &Surface, obj: &dyn Objective, config: &SolverConfig, x0: &Vector) -> Result<Trace, SolverError> {
    config.validate()?;
    if let Surface::LevelSet(_) = surface {
        return Err(SolverError::UnsupportedSurface {
            algorithm: Algorithm::Ffw,
            surface: surface.kind(),
        });
    }
    surface.check_membership(x0)?;
    let mut rec = Recorder::new(Algorithm::Ffw);
    rec.constant("L1", obj.grad_lipschitz());
    rec.constant("r", surface.reach());

    let mut x = x0.clone();
    for k in 0..config.max_iter {
        let (f, g) = obj.eval(&x);
        let p = match surface.unit_normal(&x) {
            Ok(p) => p,
            Err(e) => return rec.fail(e.into(), x),
        };
        let pg = (&g - &p * p.dot(&g)).norm();
        if !f.is_finite() || !pg.is_finite() {
            return rec.fail(SolverError::NonFinite(k), x);
        }
        if g.norm() == 0.0 {
            rec.push(IterationRecord::new(k, &x, f, pg, 0.0));
            return Ok(rec.finish(Termination::StationaryCertificate, x));
        }
        if distance_to_normal_ray(&p, &g) < config.pg_tol {
            rec.push(IterationRecord::new(k, &x, f, pg, 0.0));
            return Ok(rec.finish(Termination::Converged, x));
        }
        let next = match surface.support_point(&-&g) {
            Ok(v) => v,
            Err(e) => return rec.fail(e.into(), x),
        };
        let step = (&next - &x).norm();
        rec.push(IterationRecord::new(k, &x, f, pg, step));
        if step < config.tol_x {
            return Ok(rec.finish(Termination::Converged, next));
        }
        x = next;
    }
    Ok(rec.finish(Termination::MaxIter, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphereSurface;
    use crate::objectives::{problems, FnObjective, Linear};
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;

    #[test]
    fn linear_objective_solved_in_one_step() {
        let s = Surface::Sphere(SphereSurface::unit(3));
        let c = dvector![1.0, -2.0, 2.0];
        let trace = ffw_run(&s, &Linear::new(c.clone()), &SolverConfig::default(), &dvector![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert_abs_diff_eq!(trace.records[1].x, -&c / 3.0, epsilon = 1e-15);
        assert_eq!(trace.final_x, trace.records[1].x);
    }

    #[test]
    fn minstat_one_step_lands_on_origin() {
        let p = problems::minstat(2.0).unwrap();
        let trace = ffw_run(&p.surface, p.objective.as_ref(), &SolverConfig::default(), &p.default_x0).unwrap();
        assert_eq!(trace.records[1].x, dvector![0.0, 0.0]);
        assert_eq!(trace.final_x, dvector![0.0, 0.0]);
        assert_eq!(trace.termination, Termination::Converged);
    }

    #[test]
    fn zero_gradient_is_a_certificate() {
        let s = Surface::Sphere(SphereSurface::unit(2));
        let flat = FnObjective::new(|_: &Vector| 1.0, |x: &Vector| Vector::zeros(x.len()), 0.0);
        let trace = ffw_run(&s, &flat, &SolverConfig::default(), &dvector![1.0, 0.0]).unwrap();
        assert_eq!(trace.termination, Termination::StationaryCertificate);
        assert_eq!(trace.iterations(), 1);
    }

    #[test]
    fn inward_gradient_point_is_not_a_stop() {
        // at the top of the unit circle −f′ points inward for f = y
        let s = Surface::Sphere(SphereSurface::unit(2));
        let trace = ffw_run(&s, &Linear::new(dvector![0.0, 1.0]), &SolverConfig::default(), &dvector![0.0, 1.0]).unwrap();
        assert_eq!(trace.final_x, dvector![0.0, -1.0]);
    }

    #[test]
    fn e2_stalls_without_linear_rate() {
        let p = problems::e2();
        let config = SolverConfig {
            max_iter: 1000,
            ..SolverConfig::default()
        };
        let trace = ffw_run(&p.surface, p.objective.as_ref(), &config, &p.default_x0).unwrap();
        assert_eq!(trace.termination, Termination::MaxIter);
        let x0 = p.default_x0[0];
        let x1 = trace.records[1].x[0];
        assert_abs_diff_eq!(x1, x0 / (1.0 + 4.0 * x0 * x0).sqrt(), epsilon = 1e-15);
    }
}
