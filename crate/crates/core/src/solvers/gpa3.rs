use nalgebra::LU;

use super::gpa2::{evaluate, TangentStep};
use super::{require_unit_sphere, Algorithm, IterationRecord, Phase, Recorder, SolverConfig, SolverError, Termination, Trace};
use crate::geometry::{LevelSetSurface, Surface};
use crate::objectives::{quadratic_spectrum, Objective};
use crate::{Matrix, Vector};

/// Newton steps after which the frozen factorization is refreshed.
pub const NEWTON_REFRESH_STEPS: usize = 50;

/// Consecutive growths of `‖F‖` that send the run back to the gradient
/// phase.
const GROWTH_LIMIT: usize = 5;

const MAX_FALLBACKS: usize = 3;

/// Relative singularity floor for the smallest eigenvalue of `F′`.
const SIGMA_FLOOR_REL: f64 = 1e-10;

/// KKT system of `min f` subject to `g(x) = ½(‖x‖² − 1) = 0`.
#[derive(Clone, Debug)]
pub struct KktSystem {
    /// `F = [f′(x) + λx; g(x)]`.
    pub residual: Vector,
    /// `F′ = [[f″(x) + λI, x], [xᵀ, 0]]`.
    pub jacobian: Matrix,
    /// Smallest `|σ|` over the spectrum of `F′`.
    pub sigma1: f64,
    /// Largest `|σ|`, the spectral norm of `F′`.
    pub jacobian_norm: f64,
    /// `(L₁/σ₁²) √(‖f′ − (x, f′)x‖² + g²)`; the local convergence condition
    /// asks for this to stay below `¼`.
    pub condition_lhs: f64,
}

fn kkt_residual(grad: &Vector, x: &Vector, lambda: f64) -> Vector {
    let n = x.len();
    let top = grad + x * lambda;
    let mut residual = Vector::zeros(n + 1);
    residual.rows_mut(0, n).copy_from(&top);
    residual[n] = 0.5 * (x.norm_squared() - 1.0);
    residual
}

/// Evaluates `F`, `F′`, `σ₁` and the local convergence diagnostic at
/// `(x, λ)`.
pub fn newton_kkt_residual(obj: &dyn Objective, x: &Vector, lambda: f64) -> Result<KktSystem, SolverError> {
    let n = x.len();
    let hessian = obj.hessian(x).ok_or(SolverError::MissingHessian(Algorithm::Gpa3))?;
    let grad = obj.gradient(x);
    let residual = kkt_residual(&grad, x, lambda);

    let mut jacobian = Matrix::zeros(n + 1, n + 1);
    jacobian
        .view_mut((0, 0), (n, n))
        .copy_from(&(hessian + Matrix::identity(n, n) * lambda));
    jacobian.view_mut((0, n), (n, 1)).copy_from(x);
    jacobian.view_mut((n, 0), (1, n)).copy_from(&x.transpose());
    let spectrum = quadratic_spectrum(&jacobian)?;
    let sigma1 = spectrum.min_abs();

    let g = residual[n];
    let tangent = &grad - x * x.dot(&grad);
    let condition_lhs = obj.grad_lipschitz() / (sigma1 * sigma1) * (tangent.norm_squared() + g * g).sqrt();
    Ok(KktSystem {
        residual,
        jacobian,
        sigma1,
        jacobian_norm: spectrum.max_abs(),
        condition_lhs,
    })
}

struct NewtonState {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    z: Vector,
    since_factor: usize,
    growth: usize,
    prev_norm: f64,
}

fn factor(obj: &dyn Objective, x: &Vector, lambda: f64) -> Result<(KktSystem, LU<f64, nalgebra::Dyn, nalgebra::Dyn>), SolverError> {
    let kkt = newton_kkt_residual(obj, x, lambda)?;
    let floor = SIGMA_FLOOR_REL * kkt.jacobian_norm;
    if kkt.sigma1 <= floor {
        return Err(SolverError::SingularJacobian { sigma1: kkt.sigma1, floor });
    }
    let lu = kkt.jacobian.clone().lu();
    Ok((kkt, lu))
}

fn tangent_norm(x: &Vector, g: &Vector) -> f64 {
    let p = x / x.norm();
    (g - &p * p.dot(g)).norm()
}

/// Gradient phase with tangent-plane steps on the unit sphere, then the
/// modified Newton method on the KKT system with `F′` frozen at the switch
/// point.
///
/// The switch happens once `‖P_T f′(x)‖ < σ₁²/(4L₁)`, with `σ₁` evaluated at
/// the current iterate. If `‖F‖` grows for 5 consecutive Newton steps the
/// run returns to the gradient phase; the factorization is refreshed every
/// 50 Newton steps.
pub fn gpa3_run(surface: &Surface, obj: &dyn Objective, config: &SolverConfig, x0: &Vector) -> Result<Trace, SolverError> {
    config.validate()?;
    require_unit_sphere(surface, Algorithm::Gpa3)?;
    if !obj.has_hessian() {
        return Err(SolverError::MissingHessian(Algorithm::Gpa3));
    }
    surface.check_membership(x0)?;
    let n = x0.len();
    let sphere = LevelSetSurface::unit_sphere(n);
    let step = TangentStep::new(&sphere, obj, config.t)?;
    let l1 = obj.grad_lipschitz();

    let mut rec = Recorder::new(Algorithm::Gpa3);
    rec.constant("t", step.t);
    rec.constant("t0", step.t0);
    rec.constant("L", step.l);
    rec.constant("L1", l1);

    let mut x = x0.clone();
    let mut newton: Option<NewtonState> = None;
    let mut fallbacks = 0;
    let mut k = 0;
    while k < config.max_iter {
        let Some(state) = newton.as_mut() else {
            let (f, g, pg) = match evaluate(&sphere, obj, &x) {
                Ok(v) => v,
                Err(e) => return rec.fail(e.into(), x),
            };
            if !f.is_finite() || !pg.is_finite() {
                return rec.fail(SolverError::NonFinite(k), x);
            }
            let lambda = -x.dot(&g);
            let kkt = match newton_kkt_residual(obj, &x, lambda) {
                Ok(v) => v,
                Err(e) => return rec.fail(e, x),
            };
            let fnorm = kkt.residual.norm();
            let mut record = IterationRecord::new(k, &x, f, pg, 0.0);
            record.phase = Some(Phase::Gradient);
            record.kkt_residual = Some(fnorm);
            if fnorm <= config.newton_tol || pg < config.pg_tol {
                rec.push(record);
                return Ok(rec.finish(Termination::Converged, x));
            }
            let threshold = kkt.sigma1 * kkt.sigma1 / (4.0 * l1);
            let floor = SIGMA_FLOOR_REL * kkt.jacobian_norm;
            if kkt.sigma1 > floor && pg < threshold {
                if !rec.constants_contain("switch_k") {
                    rec.constant("switch_k", k as f64);
                    rec.constant("sigma1", kkt.sigma1);
                    rec.constant("switch_threshold", threshold);
                    rec.constant("condition_lhs", kkt.condition_lhs);
                }
                let mut z = Vector::zeros(n + 1);
                z.rows_mut(0, n).copy_from(&x);
                z[n] = lambda;
                newton = Some(NewtonState {
                    lu: kkt.jacobian.lu(),
                    z,
                    since_factor: 0,
                    growth: 0,
                    prev_norm: fnorm,
                });
                continue;
            }
            let next = match step.apply(&sphere, &x, &g, config.bisect_tol) {
                Ok(v) => v,
                Err(e) => return rec.fail(e.into(), x),
            };
            record.step_norm = (&next - &x).norm();
            let done = record.step_norm < config.tol_x;
            rec.push(record);
            if done {
                return Ok(rec.finish(Termination::Converged, next));
            }
            x = next;
            k += 1;
            continue;
        };

        let xz = state.z.rows(0, n).into_owned();
        let lambda = state.z[n];
        let (f, g) = obj.eval(&xz);
        let residual = kkt_residual(&g, &xz, lambda);
        let fnorm = residual.norm();
        if !fnorm.is_finite() {
            return rec.fail(SolverError::NonFinite(k), xz);
        }
        let mut record = IterationRecord::new(k, &xz, f, tangent_norm(&xz, &g), 0.0);
        record.phase = Some(Phase::Newton);
        record.kkt_residual = Some(fnorm);
        if fnorm <= config.newton_tol {
            rec.push(record);
            return Ok(rec.finish(Termination::Converged, xz));
        }

        state.growth = if fnorm > state.prev_norm { state.growth + 1 } else { 0 };
        state.prev_norm = fnorm;
        if state.growth >= GROWTH_LIMIT {
            fallbacks += 1;
            if fallbacks > MAX_FALLBACKS {
                rec.push(record);
                return rec.fail(SolverError::NewtonDiverged { fallbacks }, xz);
            }
            let back = &xz / xz.norm();
            record.step_norm = (&back - &xz).norm();
            rec.push(record);
            newton = None;
            x = back;
            k += 1;
            continue;
        }

        if state.since_factor >= NEWTON_REFRESH_STEPS {
            match factor(obj, &xz, lambda) {
                Ok((_, lu)) => state.lu = lu,
                Err(e) => {
                    rec.push(record);
                    return rec.fail(e, xz);
                }
            }
            state.since_factor = 0;
        }
        let Some(delta) = state.lu.solve(&residual) else {
            rec.push(record);
            return rec.fail(SolverError::SingularJacobian { sigma1: 0.0, floor: 0.0 }, xz);
        };
        state.z -= delta;
        state.since_factor += 1;
        let next = state.z.rows(0, n).into_owned();
        record.step_norm = (&next - &xz).norm();
        let done = record.step_norm < config.tol_x;
        rec.push(record);
        if done {
            return Ok(rec.finish(Termination::Converged, next));
        }
        k += 1;
    }
    let last = match &newton {
        Some(state) => state.z.rows(0, n).into_owned(),
        None => x,
    };
    Ok(rec.finish(Termination::MaxIter, last))
}
