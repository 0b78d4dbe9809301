//! Feasible sets and their geometric primitives.
//!
//! Three kinds of surface are supported. A [`SphereSurface`] is the centered
//! sphere of a given radius and admits closed-form metric projection. A
//! [`LevelSetSurface`] is the zero set of a scalar field with nonvanishing
//! gradient; points are moved onto it by bisecting a chord rather than by
//! metric projection. A [`BallBoundarySurface`] is the boundary of a ball,
//! the model strongly convex set, and exposes a support-point oracle.
//!
//! The normal cone of a sphere or level set is the line spanned by the unit
//! normal; for a ball boundary it is the outward ray. Both are reported by
//! [`Surface::unit_normal`], with [`Surface::normal_cone_is_ray`] telling them
//! apart.

mod ball;
mod level_set;
mod sphere;

use thiserror::Error;

use crate::{all_finite, Vector};

pub use ball::BallBoundarySurface;
pub use level_set::{AxisQuadric, FnLevel, LevelFunction, LevelSetSurface};
pub use sphere::{project_sphere, SphereSurface};

/// Absolute tolerance on [`Surface::membership_residual`] for points handed to
/// operations that require membership.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Default relative tolerance on `|g|` for chord bisection.
pub const DEFAULT_BISECT_TOL: f64 = 1e-12;

/// Position tolerance of chord bisection, relative to the chord length.
pub const BISECT_POSITION_REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("zero vector: metric projection onto a sphere is set-valued at its center")]
    ZeroVector,
    #[error("point is off the surface: membership residual {residual:e} exceeds {tolerance:e}")]
    OffSurface { residual: f64, tolerance: f64 },
    #[error("surface gradient vanishes, normal is undefined")]
    DegenerateNormal,
    #[error("segment does not cross the surface: g(A) = {ga:e}, g(B) = {gb:e}")]
    NoSignChange { ga: f64, gb: f64 },
    #[error("tangent step of length {step:e} exceeds the proximal smoothness constant {reach:e}")]
    StepExceedsReach { step: f64, reach: f64 },
    #[error("zero direction: every boundary point maximizes the linear functional")]
    ZeroDirection,
    #[error("input contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: surface has dimension {expected}, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} surfaces have no closed-form metric projection")]
    NoClosedFormProjection(&'static str),
    #[error("{0} surfaces have no support-point oracle")]
    NoSupportOracle(&'static str),
    #[error("invalid surface parameter: {0}")]
    InvalidParameter(String),
}

/// A feasible set `Q`.
#[derive(Clone, Debug)]
pub enum Surface {
    Sphere(SphereSurface),
    LevelSet(LevelSetSurface),
    BallBoundary(BallBoundarySurface),
}

impl Surface {
    pub fn kind(&self) -> &'static str {
        match self {
            Surface::Sphere(_) => "sphere",
            Surface::LevelSet(_) => "level-set",
            Surface::BallBoundary(_) => "ball-boundary",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Surface::Sphere(s) => s.dim(),
            Surface::LevelSet(s) => s.dim(),
            Surface::BallBoundary(s) => s.dim(),
        }
    }

    /// Proximal smoothness constant `R` of the surface.
    pub fn reach(&self) -> f64 {
        match self {
            Surface::Sphere(s) => s.radius(),
            Surface::LevelSet(s) => s.reach(),
            Surface::BallBoundary(s) => s.radius(),
        }
    }

    /// Whether the normal cone is the outward ray (ball boundaries) rather
    /// than a full line.
    pub fn normal_cone_is_ray(&self) -> bool {
        matches!(self, Surface::BallBoundary(_))
    }

    /// Distance-like defect of membership: `|‖x‖ − R|`, `|g(x)|` or
    /// `|‖x − c‖ − r|`.
    pub fn membership_residual(&self, x: &Vector) -> f64 {
        match self {
            Surface::Sphere(s) => s.membership_residual(x),
            Surface::LevelSet(s) => s.membership_residual(x),
            Surface::BallBoundary(s) => s.membership_residual(x),
        }
    }

    pub fn check_membership(&self, x: &Vector) -> Result<(), GeometryError> {
        self.check_dim(x)?;
        if !all_finite(x) {
            return Err(GeometryError::NonFinite);
        }
        let residual = self.membership_residual(x);
        if residual.is_nan() || residual > MEMBERSHIP_TOL {
            return Err(GeometryError::OffSurface {
                residual,
                tolerance: MEMBERSHIP_TOL,
            });
        }
        Ok(())
    }

    pub(crate) fn check_dim(&self, x: &Vector) -> Result<(), GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Unit vector spanning the normal cone at `x`.
    pub fn unit_normal(&self, x: &Vector) -> Result<Vector, GeometryError> {
        self.check_membership(x)?;
        match self {
            Surface::Sphere(_) => Ok(x / x.norm()),
            Surface::LevelSet(s) => s.unit_normal_unchecked(x),
            Surface::BallBoundary(s) => Ok((x - s.center()) / s.radius()),
        }
    }

    /// Orthogonal projection of `v` onto the tangent subspace at `x`.
    pub fn tangent_project(&self, x: &Vector, v: &Vector) -> Result<Vector, GeometryError> {
        if v.len() != x.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: x.len(),
                got: v.len(),
            });
        }
        let p = self.unit_normal(x)?;
        Ok(tangent_component(&p, v))
    }

    /// Closed-form metric projection; available for spheres and ball
    /// boundaries only.
    pub fn project(&self, y: &Vector) -> Result<Vector, GeometryError> {
        self.check_dim(y)?;
        match self {
            Surface::Sphere(s) => project_sphere(y, s.radius()),
            Surface::BallBoundary(s) => s.project(y),
            Surface::LevelSet(_) => Err(GeometryError::NoClosedFormProjection("level-set")),
        }
    }

    /// `arg max` of `(d, ·)` over the enclosed ball.
    pub fn support_point(&self, d: &Vector) -> Result<Vector, GeometryError> {
        self.check_dim(d)?;
        match self {
            Surface::Sphere(s) => s.as_ball().support_point(d),
            Surface::BallBoundary(s) => s.support_point(d),
            Surface::LevelSet(_) => Err(GeometryError::NoSupportOracle("level-set")),
        }
    }
}

impl Surface {
    /// The same surface described as the zero set of a quadric, for methods
    /// that retract by chord bisection. Spheres and ball boundaries become
    /// `½(‖x − c‖²/r² − 1)`, whose reach is again `r`.
    pub fn as_level_set(&self) -> LevelSetSurface {
        match self {
            Surface::LevelSet(s) => s.clone(),
            Surface::Sphere(s) => LevelSetSurface::ellipsoid(Vector::zeros(s.dim()), &vec![s.radius(); s.dim()])
                .expect("sphere radius is validated"),
            Surface::BallBoundary(b) => LevelSetSurface::ellipsoid(b.center().clone(), &vec![b.radius(); b.dim()])
                .expect("ball radius is validated"),
        }
    }
}

/// `v − (v, p) p` for a unit `p`.
pub(crate) fn tangent_component(p: &Vector, v: &Vector) -> Vector {
    v - p * p.dot(v)
}

/// Distance from `−grad` to the ray `{λp : λ ≥ 0}` spanned by the unit
/// outward normal `p`.
pub fn distance_to_normal_ray(p: &Vector, grad: &Vector) -> f64 {
    let along = -p.dot(grad);
    if along >= 0.0 {
        tangent_component(p, grad).norm()
    } else {
        grad.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use proptest::prelude::*;

    fn unit_sphere(n: usize) -> Surface {
        Surface::Sphere(SphereSurface::unit(n))
    }

    fn lpl_circle() -> Surface {
        Surface::LevelSet(LevelSetSurface::circle(dvector![0.0, 0.5], 0.5))
    }

    #[test]
    fn unit_normal_examples() {
        let s = unit_sphere(2);
        assert_eq!(s.unit_normal(&dvector![0.0, 1.0]).unwrap(), dvector![0.0, 1.0]);

        let c = lpl_circle();
        let p = c.unit_normal(&dvector![0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p, dvector![0.0, -1.0], epsilon = 1e-15);

        match s.unit_normal(&dvector![0.5, 0.0]) {
            Err(GeometryError::OffSurface { residual, .. }) => assert_eq!(residual, 0.5),
            other => panic!("expected OffSurface, got {other:?}"),
        }
    }

    #[test]
    fn ball_boundary_normal_is_outward() {
        let b = Surface::BallBoundary(BallBoundarySurface::new(dvector![0.0, -2.0], 2.0).unwrap());
        let p = b.unit_normal(&dvector![0.0, 0.0]).unwrap();
        assert_eq!(p, dvector![0.0, 1.0]);
        assert!(b.normal_cone_is_ray());
        assert!(!lpl_circle().normal_cone_is_ray());
    }

    #[test]
    fn tangent_project_examples() {
        let s = unit_sphere(3);
        let v = s
            .tangent_project(&dvector![1.0, 0.0, 0.0], &dvector![3.0, -2.0, 5.0])
            .unwrap();
        assert_eq!(v, dvector![0.0, -2.0, 5.0]);

        let c = lpl_circle();
        let v = c.tangent_project(&dvector![0.0, 0.0], &dvector![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(v, dvector![1.0, 0.0], epsilon = 1e-15);

        let x = dvector![0.6, 0.8];
        let v = unit_sphere(2).tangent_project(&x, &(&x * -4.0)).unwrap();
        assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn membership_residual_examples() {
        let s = unit_sphere(2);
        assert_abs_diff_eq!(s.membership_residual(&dvector![0.6, 0.8]), 0.0, epsilon = 1e-16);
        assert_eq!(s.membership_residual(&dvector![2.0, 0.0]), 1.0);
        let half = Surface::LevelSet(LevelSetSurface::unit_sphere(2));
        assert_eq!(half.membership_residual(&dvector![2.0, 0.0]), 1.5);
    }

    #[test]
    fn level_sets_have_no_closed_form_projection() {
        assert!(matches!(
            lpl_circle().project(&dvector![1.0, 1.0]),
            Err(GeometryError::NoClosedFormProjection(_))
        ));
        assert!(matches!(
            lpl_circle().support_point(&dvector![1.0, 1.0]),
            Err(GeometryError::NoSupportOracle(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(matches!(
            unit_sphere(3).unit_normal(&dvector![1.0, 0.0]),
            Err(GeometryError::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn level_set_views_keep_reach_and_points() {
        let ball = Surface::BallBoundary(BallBoundarySurface::new(dvector![0.0, -2.0], 2.0).unwrap());
        let level = ball.as_level_set();
        assert_abs_diff_eq!(level.reach(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(level.g(&dvector![0.0, 0.0]), 0.0, epsilon = 1e-15);
        let sphere = unit_sphere(3).as_level_set();
        assert_abs_diff_eq!(sphere.reach(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sphere.g(&dvector![2.0, 0.0, 0.0]), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn normal_ray_distance() {
        let p = dvector![0.0, 1.0];
        assert_eq!(distance_to_normal_ray(&p, &dvector![0.0, -1.0]), 0.0);
        assert_eq!(distance_to_normal_ray(&p, &dvector![0.0, 2.0]), 2.0);
        assert_eq!(distance_to_normal_ray(&p, &dvector![3.0, -4.0]), 3.0);
    }

    fn nonzero_vec(n: usize) -> impl Strategy<Value = Vector> {
        prop::collection::vec(-10.0f64..10.0, n)
            .prop_filter("nonzero", |v| v.iter().map(|a| a * a).sum::<f64>() > 1e-6)
            .prop_map(Vector::from_vec)
    }

    proptest! {
        #[test]
        fn tangent_projection_is_idempotent_and_orthogonal(
            x in nonzero_vec(4), v in prop::collection::vec(-5.0f64..5.0, 4)
        ) {
            let s = unit_sphere(4);
            let x = project_sphere(&x, 1.0).unwrap();
            let v = Vector::from_vec(v);
            let pv = s.tangent_project(&x, &v).unwrap();
            let ppv = s.tangent_project(&x, &pv).unwrap();
            prop_assert!((&ppv - &pv).norm() <= 1e-12 * (1.0 + v.norm()));
            let p = s.unit_normal(&x).unwrap();
            prop_assert!(pv.dot(&p).abs() <= 1e-12 * (1.0 + v.norm()));
        }

        #[test]
        fn level_set_tangent_projection_is_orthogonal(
            angle in 0.0f64..std::f64::consts::TAU, v in prop::collection::vec(-5.0f64..5.0, 2)
        ) {
            let c = lpl_circle();
            let x = dvector![0.5 * angle.sin(), 0.5 - 0.5 * angle.cos()];
            let v = Vector::from_vec(v);
            let pv = c.tangent_project(&x, &v).unwrap();
            let p = c.unit_normal(&x).unwrap();
            prop_assert!(pv.dot(&p).abs() <= 1e-12 * (1.0 + v.norm()));
            let ppv = c.tangent_project(&x, &pv).unwrap();
            prop_assert!((&ppv - &pv).norm() <= 1e-12 * (1.0 + v.norm()));
        }
    }
}
