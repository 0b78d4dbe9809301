use super::GeometryError;
use crate::{all_finite, Vector};

/// Boundary of the closed ball `B_r(center)`, the model strongly convex set
/// of radius `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallBoundarySurface {
    center: Vector,
    radius: f64,
}

impl BallBoundarySurface {
    pub fn new(center: Vector, radius: f64) -> Result<Self, GeometryError> {
        if center.is_empty() {
            return Err(GeometryError::InvalidParameter("dimension must be at least 1".into()));
        }
        if !all_finite(&center) {
            return Err(GeometryError::NonFinite);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn membership_residual(&self, x: &Vector) -> f64 {
        ((x - &self.center).norm() - self.radius).abs()
    }

    pub fn project(&self, y: &Vector) -> Result<Vector, GeometryError> {
        if !all_finite(y) {
            return Err(GeometryError::NonFinite);
        }
        let offset = y - &self.center;
        let norm = offset.norm();
        if norm == 0.0 {
            return Err(GeometryError::ZeroVector);
        }
        Ok(&self.center + offset / norm * self.radius)
    }

    /// Maximizer of `(d, x)` over the ball, `center + r d / ‖d‖`.
    pub fn support_point(&self, d: &Vector) -> Result<Vector, GeometryError> {
        if !all_finite(d) {
            return Err(GeometryError::NonFinite);
        }
        let norm = d.norm();
        if norm == 0.0 {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(&self.center + d / norm * self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::QuasiSphere;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;

    #[test]
    fn support_point_examples() {
        let unit = BallBoundarySurface::new(dvector![0.0, 0.0], 1.0).unwrap();
        assert_eq!(unit.support_point(&dvector![1.0, 0.0]).unwrap(), dvector![1.0, 0.0]);

        let r = 2.0;
        let lowered = BallBoundarySurface::new(dvector![0.0, -r], r).unwrap();
        assert_eq!(lowered.support_point(&dvector![0.0, 1.0]).unwrap(), dvector![0.0, 0.0]);

        assert_eq!(
            unit.support_point(&dvector![0.0, 0.0]),
            Err(GeometryError::ZeroDirection)
        );
    }

    #[test]
    fn support_point_lies_on_boundary() {
        let ball = BallBoundarySurface::new(dvector![1.0, -2.0, 0.5], 1.7).unwrap();
        let p = ball.support_point(&dvector![0.3, -4.0, 2.0]).unwrap();
        assert_abs_diff_eq!(ball.membership_residual(&p), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn support_point_is_optimal_against_boundary_samples() {
        let ball = BallBoundarySurface::new(dvector![0.4, -1.0, 2.0], 1.3).unwrap();
        let directions: Vec<Vector> = QuasiSphere::new(3, 11).take(1000).collect();
        let boundary: Vec<Vector> = QuasiSphere::new(3, 12)
            .take(1000)
            .map(|u| ball.center() + u * ball.radius())
            .collect();
        for d in &directions {
            let best = d.dot(&ball.support_point(d).unwrap());
            for y in &boundary {
                assert!(best >= d.dot(y) - 1e-12);
            }
        }
    }

    #[test]
    fn projection_onto_boundary() {
        let ball = BallBoundarySurface::new(dvector![0.0, 1.0], 2.0).unwrap();
        let p = ball.project(&dvector![3.0, 1.0]).unwrap();
        assert_abs_diff_eq!(p, dvector![2.0, 1.0], epsilon = 1e-15);
        assert_eq!(ball.project(&dvector![0.0, 1.0]), Err(GeometryError::ZeroVector));
    }
}
