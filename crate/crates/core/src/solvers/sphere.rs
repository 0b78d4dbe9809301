use super::{Algorithm, IterationRecord, Recorder, SolverConfig, SolverError, Termination, Trace};
use crate::geometry::{GeometryError, MEMBERSHIP_TOL};
use crate::objectives::{Objective, QuadraticForm};
use crate::Vector;

fn check_unit(x0: &Vector) -> Result<(), SolverError> {
    let residual = (x0.norm() - 1.0).abs();
    if !residual.is_finite() || residual > MEMBERSHIP_TOL {
        return Err(GeometryError::OffSurface {
            residual,
            tolerance: MEMBERSHIP_TOL,
        }
        .into());
    }
    Ok(())
}

/// `z(x) = ‖Kx − f′‖ − (Kx − f′, x)`, nonnegative for unit `x`.
pub(crate) fn residual_z(curvature: f64, x: &Vector, grad: &Vector) -> f64 {
    let w = x * curvature - grad;
    w.norm() - w.dot(x)
}

/// Normalized gradient iteration on the unit sphere with constant step `t`.
fn iterate(
    obj: &dyn Objective,
    t: f64,
    config: &SolverConfig,
    x0: &Vector,
    rec: &mut Recorder,
) -> Result<(Termination, Vector), (SolverError, Vector)> {
    let curvature = 1.0 / t;
    let mut x = x0.clone();
    for k in 0..config.max_iter {
        let (f, g) = obj.eval(&x);
        let pg = (&g - &x * x.dot(&g)).norm();
        if !f.is_finite() || !pg.is_finite() {
            return Err((SolverError::NonFinite(k), x));
        }
        let z = residual_z(curvature, &x, &g);
        if pg < config.pg_tol {
            let mut r = IterationRecord::new(k, &x, f, pg, 0.0);
            r.residual_z = Some(z);
            rec.push(r);
            return Ok((Termination::Converged, x));
        }
        let w = &x - &g * t;
        let norm = w.norm();
        if norm == 0.0 {
            return Err((SolverError::DegenerateStep, x));
        }
        let next = w / norm;
        let step = (&next - &x).norm();
        let mut r = IterationRecord::new(k, &x, f, pg, step);
        r.residual_z = Some(z);
        rec.push(r);
        if step < config.tol_x {
            return Ok((Termination::Converged, next));
        }
        x = next;
    }
    Ok((Termination::MaxIter, x))
}

/// `x ← (x − t f′(x))/‖x − t f′(x)‖` on the unit sphere, `t = 1/L₁` by
/// default.
///
/// With `t = 1/L₁` each step decreases `f` by at least `z(x_k)`.
pub fn sphere_gpa_run(obj: &dyn Objective, config: &SolverConfig, x0: &Vector) -> Result<Trace, SolverError> {
    config.validate()?;
    check_unit(x0)?;
    let l1 = obj.grad_lipschitz();
    let t = match config.t {
        Some(t) => t,
        None if l1 > 0.0 => 1.0 / l1,
        None => {
            return Err(SolverError::ConfigInvalid(
                "L1 = 0: the default step 1/L1 is undefined, set t explicitly".into(),
            ))
        }
    };
    let mut rec = Recorder::new(Algorithm::SphereGpa);
    rec.constant("L1", l1);
    rec.constant("t", t);
    match iterate(obj, t, config, x0, &mut rec) {
        Ok((termination, x)) => Ok(rec.finish(termination, x)),
        Err((e, x)) => rec.fail(e, x),
    }
}

/// Result of the minimal-eigenvalue iteration.
#[derive(Clone, Debug)]
pub struct EigminOutcome {
    /// Rayleigh value `(Ax, x)` of the original matrix at the final iterate.
    pub eigenvalue: f64,
    pub eigenvector: Vector,
    /// Multiple of the identity added so that `λₙ > 0`.
    pub shift: f64,
    /// `φ_k = (Ax_k, x_k) − λ₁` per record, from the eigen-decomposition.
    pub gap: Option<Vec<f64>>,
    pub trace: Trace,
}

/// Minimal eigenvalue of a symmetric matrix by
/// `x ← (x − Ax/λₙ)/‖x − Ax/λₙ‖`, the sphere iteration for `(Ax, x)` with
/// `L₁ = 2λₙ`.
///
/// When `λₙ ≤ 0` the matrix is shifted by `(1 + |λₙ|)I` first, which leaves
/// eigenvectors and eigenvalue gaps unchanged. The trace header carries
/// `τ = |(x₀, e₁)|`, `μ = 4τ²(λ₂ − λ₁)`, the global rate
/// `q = 1 − τ²(λ₂ − λ₁)/(λₙ − λ₁)` and the asymptotic rate
/// `q₁ = (λₙ − λ₂)/(λₙ − λ₁)`.
pub fn eigmin_run(form: &QuadraticForm, config: &SolverConfig, x0: &Vector, track_gap: bool) -> Result<EigminOutcome, SolverError> {
    config.validate()?;
    if x0.len() != form.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: form.dim(),
            got: x0.len(),
        }
        .into());
    }
    check_unit(x0)?;
    let top = form.spectrum().max();
    let shift = if top > 0.0 { 0.0 } else { 1.0 + top.abs() };
    let shifted;
    let working = if shift > 0.0 {
        shifted = form.shifted(shift);
        &shifted
    } else {
        form
    };
    let values = &working.spectrum().values;
    let n = values.len();
    let l1 = 2.0 * working.spectrum().max();
    let t = config.t.unwrap_or(1.0 / l1);

    let mut rec = Recorder::new(Algorithm::Eigmin);
    rec.constant("L1", l1);
    rec.constant("t", t);
    rec.constant("shift", shift);
    if n >= 2 {
        let (lo, second, hi) = (values[0], values[1], values[n - 1]);
        let tau = working.spectrum().vector(0).dot(x0).abs();
        rec.constant("tau", tau);
        rec.constant("mu", 4.0 * tau * tau * (second - lo));
        if hi > lo {
            rec.constant("q", 1.0 - tau * tau * (second - lo) / (hi - lo));
            rec.constant("q1", (hi - second) / (hi - lo));
        }
    }

    let trace = match iterate(working, t, config, x0, &mut rec) {
        Ok((termination, x)) => rec.finish(termination, x),
        Err((e, x)) => rec.fail(e, x)?,
    };
    let x = trace.final_x.clone();
    let gap = track_gap.then(|| trace.records.iter().map(|r| form.rayleigh_gap(&r.x)).collect());
    Ok(EigminOutcome {
        eigenvalue: form.value(&x),
        eigenvector: x,
        shift,
        gap,
        trace,
    })
}
