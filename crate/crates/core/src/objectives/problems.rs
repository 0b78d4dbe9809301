//! Registered example problems.
//!
//! Problems are addressed by string ids such as `lpl2d:p=0.5`, `minstat:r=2`,
//! `e2`, `approx-linear:eps=0.1`, `scf`, `quad-diag:1,2,10`, `linear:0,0,1`
//! and `dominant-ball`. Any other id is treated as the path of a matrix file
//! defining a quadratic form on the unit sphere.

use std::path::Path;
use std::sync::Arc;

use nalgebra::dvector;

use super::{ApproxLinear, Linear, MinStatObjective, Objective, ObjectiveError, ParabolicObjective, QuadraticForm, ShiftedSquare};
use crate::geometry::{BallBoundarySurface, LevelSetSurface, SphereSurface, Surface};
use crate::Vector;

/// A surface and objective pair with whatever closed-form facts are known.
#[derive(Clone)]
pub struct ExampleProblem {
    pub id: String,
    pub surface: Surface,
    pub objective: Arc<dyn Objective>,
    /// Present for quadratic forms on the sphere.
    pub quadratic: Option<Arc<QuadraticForm>>,
    pub minimizer: Option<Vector>,
    pub min_value: Option<f64>,
    pub lpl_exponent: Option<f64>,
    /// Level `β` bounding the region `f ≤ β` on which the strongly convex
    /// instance satisfies `L/ϰ < R`.
    pub level_cap: Option<f64>,
    pub default_x0: Vector,
}

impl std::fmt::Debug for ExampleProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExampleProblem")
            .field("id", &self.id)
            .field("surface", &self.surface)
            .field("minimizer", &self.minimizer)
            .field("min_value", &self.min_value)
            .field("lpl_exponent", &self.lpl_exponent)
            .field("default_x0", &self.default_x0)
            .finish_non_exhaustive()
    }
}

impl ExampleProblem {
    pub fn has_hessian(&self) -> bool {
        self.objective.has_hessian()
    }

    fn new(id: String, surface: Surface, objective: Arc<dyn Objective>, default_x0: Vector) -> Self {
        Self {
            id,
            surface,
            objective,
            quadratic: None,
            minimizer: None,
            min_value: None,
            lpl_exponent: None,
            level_cap: None,
            default_x0,
        }
    }
}

/// Ids of the registered instances, one per problem family.
pub const REGISTERED_IDS: &[&str] = &[
    "lpl2d:p=0.5",
    "lpl2d:p=1",
    "minstat:r=2",
    "e2",
    "approx-linear:eps=0.1",
    "scf",
    "quad-diag:1,2,10",
    "linear:0,0,1",
    "dominant-ball",
];

fn circle_point(center: &Vector, radius: f64, angle: f64) -> Vector {
    dvector![center[0] + radius * angle.sin(), center[1] - radius * angle.cos()]
}

/// Circle `x² + (y − ½)² = ¼` with `f = y − p x²`, `0 ≤ p ≤ 1`.
pub fn lpl2d(p: f64) -> Result<ExampleProblem, ObjectiveError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ObjectiveError::InvalidParameter(format!("lpl2d needs 0 <= p <= 1, got {p}")));
    }
    let center = dvector![0.0, 0.5];
    let x0 = circle_point(&center, 0.5, 1.2);
    let mut problem = ExampleProblem::new(
        format!("lpl2d:p={p}"),
        Surface::LevelSet(LevelSetSurface::circle(center, 0.5)),
        Arc::new(ParabolicObjective::new(p)),
        x0,
    );
    problem.minimizer = Some(dvector![0.0, 0.0]);
    problem.min_value = Some(0.0);
    problem.lpl_exponent = Some(if p < 1.0 { 2.0 } else { 4.0 / 3.0 });
    Ok(problem)
}

/// Boundary of `B_r((0, −r))` with `f = ψ(x) − y`, `r > 1`.
pub fn minstat(r: f64) -> Result<ExampleProblem, ObjectiveError> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(ObjectiveError::InvalidParameter(format!("minstat needs r > 1, got {r}")));
    }
    let ball = BallBoundarySurface::new(dvector![0.0, -r], r)?;
    let y0 = -0.5;
    let x0 = dvector![(r * r - (y0 + r) * (y0 + r)).sqrt(), y0];
    let mut problem = ExampleProblem::new(
        format!("minstat:r={r}"),
        Surface::BallBoundary(ball),
        Arc::new(MinStatObjective::new(r)),
        x0,
    );
    problem.minimizer = Some(dvector![-(r * r - 1.0).sqrt(), 1.0 - r]);
    problem.min_value = Some(-(r - 1.0) * (r - 1.0) / 2.0);
    Ok(problem)
}

/// Ball boundary `B_½((0, ½))` with `f = y − x²`, the dominance boundary case
/// `m = 1`.
pub fn e2() -> ExampleProblem {
    let center = dvector![0.0, 0.5];
    let ball = BallBoundarySurface::new(center.clone(), 0.5).expect("valid ball");
    let x0 = dvector![0.1, 0.5 - (0.25f64 - 0.01).sqrt()];
    let mut problem = ExampleProblem::new("e2".into(), Surface::BallBoundary(ball), Arc::new(ParabolicObjective::new(1.0)), x0);
    problem.minimizer = Some(dvector![0.0, 0.0]);
    problem.min_value = Some(0.0);
    problem.lpl_exponent = Some(4.0 / 3.0);
    problem
}

fn unit_third() -> Vector {
    dvector![1.0, 2.0, 2.0] / 3.0
}

fn offset_vector() -> Vector {
    dvector![0.3, -0.2, 0.1]
}

/// `(c, x) + (ε/2)‖x − d‖²` on the unit sphere in ℝ³ with `c = u + εd` for
/// a fixed unit `u`, so that `f′(0) = u` and `f′(x) = u + εx`. The minimizer
/// is `−u`.
pub fn approx_linear(eps: f64) -> Result<ExampleProblem, ObjectiveError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ObjectiveError::InvalidParameter(format!("approx-linear needs eps > 0, got {eps}")));
    }
    let u = unit_third();
    let d = offset_vector();
    let obj = ApproxLinear::new(&u + &d * eps, d, eps).with_lipschitz(1.0 + eps);
    let minimizer = -&u;
    let min_value = obj.value(&minimizer);
    let mut problem = ExampleProblem::new(
        format!("approx-linear:eps={eps}"),
        Surface::Sphere(SphereSurface::unit(3)),
        Arc::new(obj),
        dvector![1.0, 0.0, 0.0],
    );
    if 1.0 > 2.0 * eps {
        problem.minimizer = Some(minimizer);
        problem.min_value = Some(min_value);
    }
    Ok(problem)
}

/// Center, radius and curvature weight of the dominant-gradient ball
/// instance.
pub const DOMINANT_BALL_CENTER: [f64; 3] = [0.5, -0.5, 1.0];
pub const DOMINANT_BALL_RADIUS: f64 = 1.5;
pub const DOMINANT_BALL_EPS: f64 = 0.2;

/// Ball boundary in ℝ³ with an objective whose gradient `u + ε(x − center)`
/// never drops below `1 − εr` in norm, so `‖f′‖/(r L₁) ≥ (1 − εr)/(εr) > 2`.
pub fn dominant_ball() -> ExampleProblem {
    let center = Vector::from_column_slice(&DOMINANT_BALL_CENTER);
    let (r, eps) = (DOMINANT_BALL_RADIUS, DOMINANT_BALL_EPS);
    let u = unit_third();
    let d = offset_vector();
    let obj = ApproxLinear::new(&u - (&center - &d) * eps, d, eps).with_lipschitz(1.0 + eps * r);
    let minimizer = &center - &u * r;
    let min_value = obj.value(&minimizer);
    let x0 = &center + dvector![r, 0.0, 0.0];
    let ball = BallBoundarySurface::new(center, r).expect("valid ball");
    let mut problem = ExampleProblem::new("dominant-ball".into(), Surface::BallBoundary(ball), Arc::new(obj), x0);
    problem.minimizer = Some(minimizer);
    problem.min_value = Some(min_value);
    problem
}

pub const SCF_SEMI_AXES: [f64; 2] = [1.5, 1.0];
pub const SCF_TARGET: [f64; 2] = [0.0, 1.3];

/// `‖x − (0, 1.3)‖²` on the ellipse with semi-axes `1.5` and `1`.
///
/// The ellipse has reach `b²/a = 2/3`. On the level set `f ≤ 0.4` the
/// gradient norm is at most `2√0.4 < 2R`, so `L/ϰ < R` with `ϰ = 2`.
pub fn scf() -> ExampleProblem {
    let [a, b] = SCF_SEMI_AXES;
    let surface = LevelSetSurface::ellipsoid(Vector::zeros(2), &SCF_SEMI_AXES).expect("valid ellipse");
    let angle = 70f64.to_radians();
    let x0 = dvector![a * angle.cos(), b * angle.sin()];
    let target = Vector::from_column_slice(&SCF_TARGET);
    let mut problem = ExampleProblem::new(
        "scf".into(),
        Surface::LevelSet(surface),
        Arc::new(ShiftedSquare::new(target, 6.0)),
        x0,
    );
    problem.minimizer = Some(dvector![0.0, 1.0]);
    problem.min_value = Some(0.09);
    problem.lpl_exponent = Some(2.0);
    problem.level_cap = Some(0.4);
    problem
}

/// Quadratic form on the unit sphere.
pub fn quadratic(id: String, form: QuadraticForm) -> ExampleProblem {
    let n = form.dim();
    let spectrum = form.spectrum().clone();
    let x0 = if n == 1 {
        dvector![1.0]
    } else {
        let rest = (0.75 / (n - 1) as f64).sqrt();
        let mut x0 = Vector::from_element(n, rest);
        x0[0] = 0.5;
        // the default start has (x0, e₁) = ½ in the eigenbasis
        &spectrum.vectors * x0
    };
    let form = Arc::new(form);
    let mut problem = ExampleProblem::new(id, Surface::Sphere(SphereSurface::unit(n)), form.clone(), x0);
    problem.min_value = Some(spectrum.min());
    if n == 1 || spectrum.values[1] > spectrum.values[0] {
        problem.minimizer = Some(spectrum.vector(0));
        problem.lpl_exponent = Some(2.0);
    }
    problem.quadratic = Some(form);
    problem
}

/// `(c, x)` on the unit sphere.
pub fn linear(c: Vector) -> Result<ExampleProblem, ObjectiveError> {
    let norm = c.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(ObjectiveError::InvalidParameter("linear needs a nonzero finite c".into()));
    }
    let n = c.len();
    let mut x0 = Vector::zeros(n);
    x0[0] = 1.0;
    let id = format!("linear:{}", join(&c));
    let mut problem = ExampleProblem::new(id, Surface::Sphere(SphereSurface::unit(n)), Arc::new(Linear::new(c.clone())), x0);
    problem.minimizer = Some(-&c / norm);
    problem.min_value = Some(-norm);
    problem.lpl_exponent = Some(2.0);
    Ok(problem)
}

fn join(v: &Vector) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list(text: &str) -> Result<Vector, ObjectiveError> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ObjectiveError::InvalidParameter(format!("'{t}' is not a finite number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Vector::from_vec(values))
}

fn named_param(id: &str, params: Option<&str>, name: &str, default: f64) -> Result<f64, ObjectiveError> {
    let Some(params) = params else {
        return Ok(default);
    };
    let (key, value) = params
        .split_once('=')
        .ok_or_else(|| ObjectiveError::InvalidParameter(format!("{id}: expected {name}=<value>")))?;
    if key.trim() != name {
        return Err(ObjectiveError::InvalidParameter(format!("{id}: unknown parameter '{}'", key.trim())));
    }
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ObjectiveError::InvalidParameter(format!("{id}: '{value}' is not a finite number")))
}

/// Resolves a registry id, or loads a matrix file when the id names an
/// existing path.
pub fn lookup(id: &str) -> Result<ExampleProblem, ObjectiveError> {
    let (family, params) = match id.split_once(':') {
        Some((f, p)) => (f, Some(p)),
        None => (id, None),
    };
    match family {
        "lpl2d" => lpl2d(named_param(id, params, "p", 0.5)?),
        "minstat" => minstat(named_param(id, params, "r", 2.0)?),
        "approx-linear" => approx_linear(named_param(id, params, "eps", 0.1)?),
        "e2" | "scf" | "dominant-ball" if params.is_some() => {
            Err(ObjectiveError::InvalidParameter(format!("{family} takes no parameters")))
        }
        "e2" => Ok(e2()),
        "scf" => Ok(scf()),
        "dominant-ball" => Ok(dominant_ball()),
        "quad-diag" => {
            let diag = parse_list(params.unwrap_or("1,2,10"))?;
            let form = QuadraticForm::diagonal(diag.as_slice())?;
            Ok(quadratic(format!("quad-diag:{}", join(&diag)), form))
        }
        "linear" => linear(parse_list(params.unwrap_or("0,0,1"))?),
        _ if Path::new(id).is_file() => matrix_file(Path::new(id)),
        _ => Err(ObjectiveError::UnknownProblem(id.to_string())),
    }
}

/// Quadratic form read from a whitespace-separated matrix file.
pub fn matrix_file(path: &Path) -> Result<ExampleProblem, ObjectiveError> {
    let text = std::fs::read_to_string(path).map_err(|e| ObjectiveError::MatrixParse {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    let form = QuadraticForm::from_text(&text)?;
    Ok(quadratic(path.display().to_string(), form))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn every_registered_id_resolves_with_x0_on_surface() {
        for id in REGISTERED_IDS {
            let p = lookup(id).unwrap();
            p.surface.check_membership(&p.default_x0).unwrap();
            if let Some(m) = &p.minimizer {
                assert!(p.surface.membership_residual(m) <= 1e-12, "{id}");
                assert_abs_diff_eq!(p.objective.value(m), p.min_value.unwrap(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn minstat_minimum() {
        let p = minstat(2.0).unwrap();
        let m = p.minimizer.unwrap();
        assert_abs_diff_eq!(m, dvector![-(3f64).sqrt(), -1.0], epsilon = 1e-15);
        assert_eq!(p.min_value, Some(-0.5));
        // the minimum beats every boundary sample
        for x in p.surface.quasi_random_points(2000, 3).unwrap() {
            assert!(p.objective.value(&x) >= -0.5 - 1e-12);
        }
    }

    #[test]
    fn approx_linear_gradient_at_origin_is_unit() {
        let p = approx_linear(0.1).unwrap();
        let g0 = p.objective.gradient(&Vector::zeros(3));
        assert_abs_diff_eq!(g0.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn scf_minimizer_beats_samples_and_level_condition_holds() {
        let p = scf();
        for x in p.surface.quasi_random_points(2000, 1).unwrap() {
            assert!(p.objective.value(&x) >= 0.09 - 1e-12);
            assert!(p.objective.gradient(&x).norm() <= 6.0);
        }
        let l_level = 2.0 * p.level_cap.unwrap().sqrt();
        assert!(l_level / 2.0 < p.surface.reach());
        assert!(p.objective.value(&p.default_x0) <= p.level_cap.unwrap());
    }

    #[test]
    fn quadratic_default_start_has_half_overlap() {
        let p = lookup("quad-diag:1,2,10").unwrap();
        assert_abs_diff_eq!(p.default_x0[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.default_x0.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bad_ids() {
        assert!(matches!(lookup("nope"), Err(ObjectiveError::UnknownProblem(_))));
        assert!(matches!(lookup("lpl2d:q=1"), Err(ObjectiveError::InvalidParameter(_))));
        assert!(matches!(lookup("minstat:r=0.5"), Err(ObjectiveError::InvalidParameter(_))));
        assert!(matches!(lookup("e2:x=1"), Err(ObjectiveError::InvalidParameter(_))));
    }
}
