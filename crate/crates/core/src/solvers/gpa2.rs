use super::{Algorithm, IterationRecord, Recorder, SolverConfig, SolverError, Termination, Trace};
use crate::geometry::{GeometryError, LevelSetSurface, Surface};
use crate::objectives::{value_lipschitz, Objective};
use crate::Vector;

/// `t₀ = 1/(L₁ + 2L/R)`; steps in `(0, 2t₀)` are admissible.
pub fn tangent_step_bound(l1: f64, l: f64, reach: f64) -> f64 {
    1.0 / (l1 + 2.0 * l / reach)
}

/// Step constants of the tangent-plane method.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TangentStep {
    pub t: f64,
    pub t0: f64,
    pub l: f64,
    pub l1: f64,
    pub reach: f64,
}

impl TangentStep {
    pub(crate) fn new(surface: &LevelSetSurface, obj: &dyn Objective, t: Option<f64>) -> Result<Self, SolverError> {
        let l1 = obj.grad_lipschitz();
        let l = value_lipschitz(&Surface::LevelSet(surface.clone()), obj)?;
        let reach = surface.reach();
        let t0 = tangent_step_bound(l1, l, reach);
        let t = t.unwrap_or(t0);
        if !(t > 0.0 && t < 2.0 * t0) {
            return Err(SolverError::ConfigInvalid(format!(
                "step t = {t} must lie in (0, 2 t0) = (0, {}) where t0 = 1/(L1 + 2L/R)",
                2.0 * t0
            )));
        }
        Ok(Self { t, t0, l, l1, reach })
    }

    /// `q(t) = t − t²(L₁/2 + L/R)`, the guaranteed decrease per unit
    /// `‖P_T f′‖²`.
    pub(crate) fn decrease_factor(&self) -> f64 {
        self.t - self.t * self.t * (0.5 * self.l1 + self.l / self.reach)
    }

    fn record(&self, rec: &mut Recorder) {
        rec.constant("t", self.t);
        rec.constant("t0", self.t0);
        rec.constant("q_t", self.decrease_factor());
        rec.constant("L", self.l);
        rec.constant("L1", self.l1);
        rec.constant("R", self.reach);
    }

    /// One step from `x`: tangent step to `z = x − t P_T f′(x)`, then
    /// bisection on the normal chord `[z − pw, z + pw]` with
    /// `w = s + 2|g(x)|/‖∇g(x)‖` and `s = R − √(R² − ‖x − z‖²)`.
    ///
    /// The extra width covers the membership defect that `x` carries from
    /// the previous bisection; without it the chord of a very short step
    /// may not reach the surface.
    pub(crate) fn apply(&self, surface: &LevelSetSurface, x: &Vector, grad: &Vector, bisect_tol: f64) -> Result<Vector, GeometryError> {
        let p = Surface::LevelSet(surface.clone()).unit_normal(x)?;
        let tangent = grad - &p * p.dot(grad);
        let shift = &tangent * self.t;
        let d = shift.norm();
        if d > self.reach {
            return Err(GeometryError::StepExceedsReach { step: d, reach: self.reach });
        }
        let z = x - shift;
        // R − √(R² − d²) without cancellation
        let s = d * d / (self.reach + (self.reach * self.reach - d * d).sqrt());
        let grad_norm = surface.grad_g(x).norm();
        let defect = if grad_norm > 0.0 { surface.g(x).abs() / grad_norm } else { 0.0 };
        let w = s + 2.0 * defect;
        surface.segment_intersect(&(&z - &p * w), &(&z + &p * w), bisect_tol)
    }
}

/// Projected gradient state at `x`: `(f, f′, ‖P_T f′‖)`.
pub(crate) fn evaluate(surface: &LevelSetSurface, obj: &dyn Objective, x: &Vector) -> Result<(f64, Vector, f64), GeometryError> {
    let (f, g) = obj.eval(x);
    let p = Surface::LevelSet(surface.clone()).unit_normal(x)?;
    let pg = (&g - &p * p.dot(&g)).norm();
    Ok((f, g, pg))
}

/// Tangent-plane gradient step followed by chord bisection back onto a
/// level-set surface.
///
/// For `t ∈ (0, 2t₀)` each step satisfies
/// `f(x₁) − f(x₀) ≤ −‖P_T f′(x₀)‖² (t − t²(L₁/2 + L/R))`.
pub fn gpa2_run(surface: &LevelSetSurface, obj: &dyn Objective, config: &SolverConfig, x0: &Vector) -> Result<Trace, SolverError> {
    config.validate()?;
    let step = TangentStep::new(surface, obj, config.t)?;
    Surface::LevelSet(surface.clone()).check_membership(x0)?;
    let mut rec = Recorder::new(Algorithm::Gpa2);
    step.record(&mut rec);

    let mut x = x0.clone();
    for k in 0..config.max_iter {
        let (f, g, pg) = match evaluate(surface, obj, &x) {
            Ok(v) => v,
            Err(e) => return rec.fail(e.into(), x),
        };
        if !f.is_finite() || !pg.is_finite() {
            return rec.fail(SolverError::NonFinite(k), x);
        }
        if pg < config.pg_tol {
            rec.push(IterationRecord::new(k, &x, f, pg, 0.0));
            return Ok(rec.finish(Termination::Converged, x));
        }
        let next = match step.apply(surface, &x, &g, config.bisect_tol) {
            Ok(v) => v,
            Err(e) => return rec.fail(e.into(), x),
        };
        let norm = (&next - &x).norm();
        rec.push(IterationRecord::new(k, &x, f, pg, norm));
        if norm < config.tol_x {
            return Ok(rec.finish(Termination::Converged, next));
        }
        x = next;
    }
    Ok(rec.finish(Termination::MaxIter, x))
}
