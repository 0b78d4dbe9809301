use std::fmt;
use std::sync::Arc;

use super::{GeometryError, BISECT_POSITION_REL_TOL, MEMBERSHIP_TOL};
use crate::{all_finite, Vector};

/// Scalar field `g` whose zero set is the surface, together with its
/// gradient.
pub trait LevelFunction: Send + Sync {
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
}

/// `g(x) = scale · (Σ wᵢ (xᵢ − cᵢ)² − 1)`, an axis-aligned ellipsoid.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisQuadric {
    center: Vector,
    weights: Vector,
    scale: f64,
}

impl AxisQuadric {
    pub fn new(center: Vector, weights: Vector, scale: f64) -> Result<Self, GeometryError> {
        if center.is_empty() || center.len() != weights.len() {
            return Err(GeometryError::InvalidParameter(
                "center and weights must have the same positive length".into(),
            ));
        }
        if !all_finite(&center) || weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(GeometryError::InvalidParameter(
                "weights must be positive and finite".into(),
            ));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GeometryError::InvalidParameter("scale must be positive".into()));
        }
        Ok(Self {
            center,
            weights,
            scale,
        })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    /// Lower bound of `‖g′‖` on the zero set: `2·scale·√(min w)`.
    pub fn grad_lower(&self) -> f64 {
        2.0 * self.scale * self.weights.min().sqrt()
    }

    /// Lipschitz constant of `g′`: `2·scale·max w`.
    pub fn grad_lipschitz(&self) -> f64 {
        2.0 * self.scale * self.weights.max()
    }

    /// Largest semi-axis.
    pub fn max_semi_axis(&self) -> f64 {
        1.0 / self.weights.min().sqrt()
    }
}

impl LevelFunction for AxisQuadric {
    fn value(&self, x: &Vector) -> f64 {
        let q: f64 = x
            .iter()
            .zip(self.center.iter())
            .zip(self.weights.iter())
            .map(|((xi, ci), wi)| wi * (xi - ci) * (xi - ci))
            .sum();
        self.scale * (q - 1.0)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_iterator(
            x.len(),
            x.iter()
                .zip(self.center.iter())
                .zip(self.weights.iter())
                .map(|((xi, ci), wi)| 2.0 * self.scale * wi * (xi - ci)),
        )
    }
}

/// Level function built from a pair of closures.
pub struct FnLevel<G, D> {
    value: G,
    gradient: D,
}

impl<G, D> FnLevel<G, D>
where
    G: Fn(&Vector) -> f64 + Send + Sync,
    D: Fn(&Vector) -> Vector + Send + Sync,
{
    pub fn new(value: G, gradient: D) -> Self {
        Self { value, gradient }
    }
}

impl<G, D> LevelFunction for FnLevel<G, D>
where
    G: Fn(&Vector) -> f64 + Send + Sync,
    D: Fn(&Vector) -> Vector + Send + Sync,
{
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }
}

/// Surface `{x : g(x) = 0}` without edge, proximally smooth with constant
/// `reach`, with `‖g′‖ ≥ grad_lower` on the surface.
///
/// `interior` and `extent` describe a star center of the enclosed region and
/// a radius beyond which the surface does not reach; they are used to move
/// sampled directions onto the surface by radial bisection.
#[derive(Clone)]
pub struct LevelSetSurface {
    field: Arc<dyn LevelFunction>,
    reach: f64,
    grad_lower: f64,
    interior: Vector,
    extent: f64,
}

impl fmt::Debug for LevelSetSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelSetSurface")
            .field("reach", &self.reach)
            .field("grad_lower", &self.grad_lower)
            .field("interior", &self.interior.as_slice())
            .field("extent", &self.extent)
            .finish_non_exhaustive()
    }
}

impl LevelSetSurface {
    pub fn new(
        field: Arc<dyn LevelFunction>,
        reach: f64,
        grad_lower: f64,
        interior: Vector,
        extent: f64,
    ) -> Result<Self, GeometryError> {
        for (name, v) in [("reach", reach), ("grad_lower", grad_lower), ("extent", extent)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GeometryError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if interior.is_empty() || !all_finite(&interior) {
            return Err(GeometryError::InvalidParameter(
                "interior point must be a finite vector".into(),
            ));
        }
        Ok(Self {
            field,
            reach,
            grad_lower,
            interior,
            extent,
        })
    }

    /// Builds the surface with the reach defaulted to `m / L₁g`, where `m`
    /// bounds `‖g′‖` from below on the surface and `L₁g` is the Lipschitz
    /// constant of `g′`.
    pub fn from_gradient_bounds(
        field: Arc<dyn LevelFunction>,
        grad_lower: f64,
        grad_lipschitz: f64,
        interior: Vector,
        extent: f64,
    ) -> Result<Self, GeometryError> {
        if !(grad_lipschitz > 0.0 && grad_lipschitz.is_finite()) {
            return Err(GeometryError::InvalidParameter(
                "Lipschitz constant of g' must be positive".into(),
            ));
        }
        Self::new(field, grad_lower / grad_lipschitz, grad_lower, interior, extent)
    }

    pub fn from_quadric(q: AxisQuadric) -> Self {
        let interior = q.center().clone();
        let extent = 2.0 * q.max_semi_axis();
        let (m, l1) = (q.grad_lower(), q.grad_lipschitz());
        Self::from_gradient_bounds(Arc::new(q), m, l1, interior, extent)
            .expect("axis quadric bounds are positive")
    }

    /// `g(x) = ½(‖x‖² − 1)`.
    pub fn unit_sphere(dim: usize) -> Self {
        let q = AxisQuadric::new(Vector::zeros(dim), Vector::from_element(dim, 1.0), 0.5)
            .expect("valid unit sphere quadric");
        Self::from_quadric(q)
    }

    /// `g(x) = ‖x − center‖² − radius²`.
    pub fn circle(center: Vector, radius: f64) -> Self {
        let n = center.len();
        let q = AxisQuadric::new(center, Vector::from_element(n, 1.0 / (radius * radius)), radius * radius)
            .expect("valid circle quadric");
        Self::from_quadric(q)
    }

    /// `g(x) = ½(Σ ((xᵢ − cᵢ)/aᵢ)² − 1)`.
    pub fn ellipsoid(center: Vector, semi_axes: &[f64]) -> Result<Self, GeometryError> {
        let weights = Vector::from_iterator(semi_axes.len(), semi_axes.iter().map(|a| 1.0 / (a * a)));
        Ok(Self::from_quadric(AxisQuadric::new(center, weights, 0.5)?))
    }

    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn grad_lower(&self) -> f64 {
        self.grad_lower
    }

    pub fn interior(&self) -> &Vector {
        &self.interior
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn g(&self, x: &Vector) -> f64 {
        self.field.value(x)
    }

    pub fn grad_g(&self, x: &Vector) -> Vector {
        self.field.gradient(x)
    }

    pub fn membership_residual(&self, x: &Vector) -> f64 {
        self.field.value(x).abs()
    }

    pub(super) fn unit_normal_unchecked(&self, x: &Vector) -> Result<Vector, GeometryError> {
        let grad = self.field.gradient(x);
        let norm = grad.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GeometryError::DegenerateNormal);
        }
        Ok(grad / norm)
    }

    /// Finds the point where the segment `[a, b]` crosses the surface by
    /// bisection.
    ///
    /// Accepts an endpoint directly when `|g| ≤ tol · scale`, where
    /// `scale = max(1, |g(a)|, |g(b)|)`. Otherwise the endpoints must bracket
    /// a sign change. Bisection stops once `|g(mid)| ≤ tol · scale` or the
    /// bracket is shorter than `1e-14 · ‖b − a‖`, which bounds the iteration
    /// count by `⌈log₂(1e14)⌉ + 2`.
    pub fn segment_intersect(&self, a: &Vector, b: &Vector, tol: f64) -> Result<Vector, GeometryError> {
        if !all_finite(a) || !all_finite(b) {
            return Err(GeometryError::NonFinite);
        }
        let ga = self.g(a);
        let gb = self.g(b);
        let scale = 1f64.max(ga.abs()).max(gb.abs());
        let accept = tol * scale;
        if ga.abs() <= accept {
            return Ok(a.clone());
        }
        if gb.abs() <= accept {
            return Ok(b.clone());
        }
        if ga.signum() == gb.signum() {
            return Err(GeometryError::NoSignChange { ga, gb });
        }

        let chord = b - a;
        let length = chord.norm();
        let position_tol = BISECT_POSITION_REL_TOL * length;
        let max_iter = (length / position_tol).log2().ceil() as usize + 2;

        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut g_lo = ga;
        let mut mid_point = a + &chord * 0.5;
        for _ in 0..max_iter {
            let mid = 0.5 * (lo + hi);
            mid_point = a + &chord * mid;
            let g_mid = self.g(&mid_point);
            if g_mid.abs() <= accept {
                break;
            }
            if g_mid.signum() == g_lo.signum() {
                lo = mid;
                g_lo = g_mid;
            } else {
                hi = mid;
            }
            if (hi - lo) * length <= position_tol {
                mid_point = a + &chord * (0.5 * (lo + hi));
                break;
            }
        }
        Ok(mid_point)
    }

    /// Moves along the ray from the interior point in direction `d` to the
    /// surface.
    pub fn radial_point(&self, d: &Vector, tol: f64) -> Result<Vector, GeometryError> {
        let norm = d.norm();
        if norm == 0.0 {
            return Err(GeometryError::ZeroDirection);
        }
        let outer = &self.interior + d * (self.extent / norm);
        self.segment_intersect(&self.interior, &outer, tol)
    }

    /// `true` when `x` is within the membership tolerance.
    pub fn contains(&self, x: &Vector) -> bool {
        self.membership_residual(x) <= MEMBERSHIP_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_BISECT_TOL;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use proptest::prelude::*;

    #[test]
    fn bisection_examples() {
        let circle = LevelSetSurface::unit_sphere(2);
        let x = circle
            .segment_intersect(&dvector![0.5, 0.0], &dvector![2.0, 0.0], 1e-12)
            .unwrap();
        assert_abs_diff_eq!(x, dvector![1.0, 0.0], epsilon = 1e-12);

        let on = dvector![0.0, 1.0];
        assert_eq!(circle.segment_intersect(&on, &dvector![0.0, 3.0], 1e-12).unwrap(), on);

        assert!(matches!(
            circle.segment_intersect(&dvector![2.0, 0.0], &dvector![3.0, 0.0], 1e-12),
            Err(GeometryError::NoSignChange { .. })
        ));
    }

    #[test]
    fn reach_defaults_from_gradient_bounds() {
        assert_abs_diff_eq!(LevelSetSurface::unit_sphere(3).reach(), 1.0);
        assert_abs_diff_eq!(LevelSetSurface::circle(dvector![0.0, 0.5], 0.5).reach(), 0.5);
        let ellipse = LevelSetSurface::ellipsoid(dvector![0.0, 0.0], &[1.5, 1.0]).unwrap();
        // b²/a: smallest radius of curvature of the ellipse
        assert_abs_diff_eq!(ellipse.reach(), 1.0 / 1.5, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_normal_is_reported() {
        let flat = LevelSetSurface::new(
            Arc::new(FnLevel::new(|x: &Vector| x[0] * x[0] * x[0], |x: &Vector| dvector![3.0 * x[0] * x[0], 0.0])),
            1.0,
            1.0,
            dvector![-1.0, 0.0],
            3.0,
        )
        .unwrap();
        assert_eq!(
            flat.unit_normal_unchecked(&dvector![0.0, 0.0]),
            Err(GeometryError::DegenerateNormal)
        );
    }

    #[test]
    fn radial_point_lands_on_ellipse() {
        let ellipse = LevelSetSurface::ellipsoid(dvector![0.2, -0.1], &[1.5, 1.0]).unwrap();
        let x = ellipse.radial_point(&dvector![1.0, 1.0], DEFAULT_BISECT_TOL).unwrap();
        assert!(ellipse.membership_residual(&x) <= 1e-12);
    }

    proptest! {
        #[test]
        fn chords_of_unit_circle(theta in 0.0f64..std::f64::consts::TAU, inner in 0.0f64..0.99, outer in 1.01f64..4.0) {
            let circle = LevelSetSurface::unit_sphere(2);
            let u = dvector![theta.cos(), theta.sin()];
            let x = circle.segment_intersect(&(&u * inner), &(&u * outer), 1e-12).unwrap();
            prop_assert!(circle.membership_residual(&x) <= 1e-12 * 8.0f64.max(1.0));
        }

        #[test]
        fn chords_of_lpl_circle(theta in 0.0f64..std::f64::consts::TAU, phi in 0.0f64..std::f64::consts::TAU, len in 0.6f64..2.0) {
            // chords from the center outward in direction phi, offset by a tangent shift
            let circle = LevelSetSurface::circle(dvector![0.0, 0.5], 0.5);
            let center = dvector![0.0, 0.5];
            let shift = dvector![theta.cos(), theta.sin()] * 0.1;
            let a = &center + &shift;
            let b = &a + dvector![phi.cos(), phi.sin()] * len;
            let x = circle.segment_intersect(&a, &b, 1e-12).unwrap();
            let scale = 1f64.max(circle.g(&a).abs()).max(circle.g(&b).abs());
            prop_assert!(circle.membership_residual(&x) <= 1e-12 * scale);
        }
    }
}
