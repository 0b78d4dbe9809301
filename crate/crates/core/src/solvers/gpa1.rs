use super::{Algorithm, IterationRecord, Recorder, SolverConfig, SolverError, Termination, Trace};
use crate::geometry::Surface;
use crate::objectives::{value_lipschitz, Objective};
use crate::Vector;

/// Safety factor applied to the sampled spread of `f`.
pub const DELTA_F_SAFETY: f64 = 1.5;

const DELTA_F_SAMPLES: usize = 10_000;

/// Constants shared by the projection method and the stationary-point
/// driver.
struct ProjectionSetup {
    c: f64,
    l1: f64,
    l: f64,
    reach: f64,
}

fn setup(surface: &Surface, obj: &dyn Objective, config: &SolverConfig, algorithm: Algorithm) -> Result<ProjectionSetup, SolverError> {
    config.validate()?;
    if let Surface::LevelSet(_) = surface {
        return Err(SolverError::UnsupportedSurface {
            algorithm,
            surface: surface.kind(),
        });
    }
    let l1 = obj.grad_lipschitz();
    let l = value_lipschitz(surface, obj)?;
    let reach = surface.reach();
    let c = match config.c {
        Some(c) => c,
        None => {
            let c = l1.max(2.0 * (l / reach - l1));
            if c > 0.0 {
                c
            } else {
                1.0
            }
        }
    };
    // L/(C + L₁) < R, equivalently C > L/R − L₁
    if l / (c + l1) >= reach {
        return Err(SolverError::ConfigInvalid(format!(
            "C = {c} violates L/(C + L1) < R with L = {l}, L1 = {l1}, R = {reach}"
        )));
    }
    Ok(ProjectionSetup { c, l1, l, reach })
}

fn record_setup(rec: &mut Recorder, s: &ProjectionSetup) {
    rec.constant("C", s.c);
    rec.constant("C1", s.c + s.l1);
    rec.constant("L", s.l);
    rec.constant("L1", s.l1);
    rec.constant("R", s.reach);
}

/// Runs `x ← P_Q(x − f′(x)/C₁)`, `C₁ = C + L₁`, until the step drops below
/// `stop_step`.
#[allow(clippy::too_many_arguments)]
fn iterate(
    surface: &Surface,
    obj: &dyn Objective,
    c1: f64,
    x0: &Vector,
    max_iter: usize,
    stop_step: f64,
    pg_tol: Option<f64>,
    rec: &mut Recorder,
) -> Result<(Termination, Vector), (SolverError, Vector)> {
    let mut x = x0.clone();
    for k in 0..max_iter {
        let (f, g) = obj.eval(&x);
        let pg = surface.tangent_project(&x, &g).map_err(|e| (e.into(), x.clone()))?.norm();
        if !f.is_finite() || !pg.is_finite() {
            return Err((SolverError::NonFinite(k), x));
        }
        if pg_tol.is_some_and(|tol| pg < tol) {
            rec.push(IterationRecord::new(k, &x, f, pg, 0.0));
            return Ok((Termination::Converged, x));
        }
        let next = surface.project(&(&x - &g / c1)).map_err(|e| (e.into(), x.clone()))?;
        let step = (&next - &x).norm();
        rec.push(IterationRecord::new(k, &x, f, pg, step));
        if step < stop_step {
            return Ok((Termination::Converged, next));
        }
        x = next;
    }
    Ok((Termination::MaxIter, x))
}

/// Gradient projection with metric projection onto a sphere or ball
/// boundary.
///
/// With `L/(C + L₁) < R` every step satisfies
/// `f(x_{k+1}) + (C/2)‖x_{k+1} − x_k‖² ≤ f(x_k)`.
pub fn gpa1_run(surface: &Surface, obj: &dyn Objective, config: &SolverConfig, x0: &Vector) -> Result<Trace, SolverError> {
    let s = setup(surface, obj, config, Algorithm::Gpa1)?;
    surface.check_membership(x0)?;
    let mut rec = Recorder::new(Algorithm::Gpa1);
    record_setup(&mut rec, &s);
    match iterate(surface, obj, s.c + s.l1, x0, config.max_iter, config.tol_x, Some(config.pg_tol), &mut rec) {
        Ok((termination, x)) => Ok(rec.finish(termination, x)),
        Err((e, x)) => rec.fail(e, x),
    }
}

/// Result of the stationary-point driver.
#[derive(Clone, Debug)]
pub struct StationaryOutcome {
    pub point: Vector,
    pub steps: usize,
    /// `⌊2Δf/(Cδ²)⌋ + 1`.
    pub step_bound: f64,
    /// `ε/(C + 2L₁)`.
    pub delta: f64,
    pub delta_f: f64,
    pub trace: Trace,
}

/// Estimated spread `sup f − inf f` over the surface:
/// `1.5 · 2 · max |f − mean f|` over `10⁴` quasi-random samples.
pub fn estimate_spread(surface: &Surface, obj: &dyn Objective, seed: u64) -> Result<f64, SolverError> {
    let values: Vec<f64> = surface
        .quasi_random_points(DELTA_F_SAMPLES, seed)?
        .iter()
        .map(|x| obj.value(x))
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let dev = values.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    Ok(DELTA_F_SAFETY * 2.0 * dev)
}

/// Projection iterations until `‖x_k − x_{k+1}‖ < δ = ε/(C + 2L₁)`; the
/// returned `x_{k+1}` is `ε`-stationary and at most `⌊2Δf/(Cδ²)⌋ + 1` steps
/// are taken.
pub fn stationary_point_solve(
    surface: &Surface,
    obj: &dyn Objective,
    config: &SolverConfig,
    x0: &Vector,
) -> Result<StationaryOutcome, SolverError> {
    let s = setup(surface, obj, config, Algorithm::Stationary)?;
    surface.check_membership(x0)?;
    let delta = config.eps / (s.c + 2.0 * s.l1);
    let delta_f = estimate_spread(surface, obj, config.seed)?;
    let step_bound = (2.0 * delta_f / (s.c * delta * delta)).floor() + 1.0;

    let mut rec = Recorder::new(Algorithm::Stationary);
    record_setup(&mut rec, &s);
    rec.constant("eps", config.eps);
    rec.constant("delta", delta);
    rec.constant("delta_f", delta_f);
    rec.constant("N", step_bound);

    let (termination, point) = match iterate(surface, obj, s.c + s.l1, x0, config.max_iter, delta, None, &mut rec) {
        Ok(done) => done,
        Err((e, x)) => {
            let trace = rec.fail(e, x.clone())?;
            return Ok(StationaryOutcome {
                point: x,
                steps: trace.iterations(),
                step_bound,
                delta,
                delta_f,
                trace,
            });
        }
    };
    let steps = rec.len();
    let trace = rec.finish(termination, point.clone());
    Ok(StationaryOutcome {
        point,
        steps,
        step_bound,
        delta,
        delta_f,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphereSurface;
    use crate::objectives::{problems, Linear, QuadraticForm};
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;

    fn sphere3() -> Surface {
        Surface::Sphere(SphereSurface::unit(3))
    }

    fn assert_lyapunov(trace: &Trace, obj: &dyn Objective) {
        let c = trace.constant("C").unwrap();
        let xs: Vec<&Vector> = trace.records.iter().map(|r| &r.x).chain(std::iter::once(&trace.final_x)).collect();
        for w in xs.windows(2) {
            let lhs = obj.value(w[1]) + 0.5 * c * (w[1] - w[0]).norm_squared();
            assert!(lhs <= obj.value(w[0]) + 1e-10);
        }
    }

    #[test]
    fn linear_objective_decreases_toward_minus_one() {
        let obj = Linear::new(dvector![0.0, 0.0, 1.0]);
        let config = SolverConfig {
            c: Some(10.0),
            ..SolverConfig::default()
        };
        let trace = gpa1_run(&sphere3(), &obj, &config, &dvector![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        let f = trace.values();
        assert!(f.windows(2).all(|w| w[1] <= w[0]));
        assert_abs_diff_eq!(obj.value(&trace.final_x), -1.0, epsilon = 1e-12);
        assert_lyapunov(&trace, &obj);
    }

    #[test]
    fn minimizer_start_is_a_fixed_point() {
        let obj = Linear::new(dvector![0.0, 0.0, 1.0]);
        let trace = gpa1_run(&sphere3(), &obj, &SolverConfig::default(), &dvector![0.0, 0.0, -1.0]).unwrap();
        assert_eq!(trace.iterations(), 1);
        assert!(trace.records[0].step_norm <= 1e-12);
    }

    #[test]
    fn quadratic_decreases_to_smallest_eigenvalue() {
        let q = QuadraticForm::diagonal(&[1.0, 3.0]).unwrap();
        let s = Surface::Sphere(SphereSurface::unit(2));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let trace = gpa1_run(&s, &q, &SolverConfig::default(), &dvector![h, h]).unwrap();
        let f = trace.values();
        assert!(f.windows(2).all(|w| w[1] < w[0] || w[0] - 1.0 < 1e-15));
        assert_abs_diff_eq!(q.value(&trace.final_x), q.spectrum().min(), epsilon = 1e-12);
        assert_lyapunov(&trace, &q);
    }

    #[test]
    fn radius_inequality_is_enforced() {
        let p = problems::minstat(2.0).unwrap();
        let config = SolverConfig {
            c: Some(0.05),
            ..SolverConfig::default()
        };
        assert!(matches!(
            gpa1_run(&p.surface, p.objective.as_ref(), &config, &p.default_x0),
            Err(SolverError::ConfigInvalid(_))
        ));
        let lpl = problems::lpl2d(0.5).unwrap();
        assert!(matches!(
            gpa1_run(&lpl.surface, lpl.objective.as_ref(), &SolverConfig::default(), &lpl.default_x0),
            Err(SolverError::UnsupportedSurface { .. })
        ));
    }

    #[test]
    fn minstat_lyapunov_on_ball_boundary() {
        let p = problems::minstat(2.0).unwrap();
        let trace = gpa1_run(&p.surface, p.objective.as_ref(), &SolverConfig::default(), &dvector![-1.0, -2.0 + 3f64.sqrt()]).unwrap();
        assert_lyapunov(&trace, p.objective.as_ref());
        assert_abs_diff_eq!(p.objective.value(&trace.final_x), -0.5, epsilon = 1e-10);
    }

    #[test]
    fn stationary_driver_certifies_tangent_residual() {
        let obj = Linear::new(dvector![0.0, 0.0, 1.0]);
        let s = sphere3();
        let config = SolverConfig {
            eps: 1e-3,
            ..SolverConfig::default()
        };
        let out = stationary_point_solve(&s, &obj, &config, &dvector![1.0, 0.0, 0.0]).unwrap();
        let x = &out.point;
        let residual = (obj.coefficients() - x * x.dot(obj.coefficients())).norm();
        assert!(residual <= 1e-3, "residual {residual}");
        assert!(out.steps as f64 <= out.step_bound);
    }

    #[test]
    fn stationary_driver_with_huge_eps_stops_immediately() {
        let q = QuadraticForm::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let config = SolverConfig {
            eps: 1e3,
            ..SolverConfig::default()
        };
        let out = stationary_point_solve(&sphere3(), &q, &config, &dvector![0.6, 0.0, 0.8]).unwrap();
        assert!(out.steps <= 2);
    }

    #[test]
    fn stationary_step_bound_on_quadratic() {
        let q = QuadraticForm::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let config = SolverConfig {
            eps: 1e-4,
            ..SolverConfig::default()
        };
        let out = stationary_point_solve(&sphere3(), &q, &config, &dvector![0.6, 0.0, 0.8]).unwrap();
        assert_eq!(out.trace.termination, Termination::Converged);
        let c = out.trace.constant("C").unwrap();
        let delta = 1e-4 / (c + 2.0 * q.grad_lipschitz());
        assert_abs_diff_eq!(out.delta, delta, epsilon = 1e-18);
        assert_eq!(out.step_bound, (2.0 * out.delta_f / (c * delta * delta)).floor() + 1.0);
        assert!(out.steps as f64 <= out.step_bound);
        // the spread estimate is an upper bound of λₙ − λ₁ = 2
        assert!(out.delta_f >= 2.0);
    }
}
