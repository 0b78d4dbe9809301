use super::{BallBoundarySurface, GeometryError};
use crate::{all_finite, Vector};

/// The centered sphere `{x : ‖x‖ = radius}`.
///
/// Its proximal smoothness constant and the strong convexity radius of the
/// enclosed ball both equal `radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereSurface {
    dim: usize,
    radius: f64,
}

impl SphereSurface {
    pub fn new(dim: usize, radius: f64) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "sphere radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { dim, radius })
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(dim, 1.0).expect("unit sphere of positive dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn membership_residual(&self, x: &Vector) -> f64 {
        (x.norm() - self.radius).abs()
    }

    pub fn as_ball(&self) -> BallBoundarySurface {
        BallBoundarySurface::new(Vector::zeros(self.dim), self.radius)
            .expect("sphere radius already validated")
    }
}

/// Metric projection onto the centered sphere of the given radius:
/// `radius · x / ‖x‖`.
pub fn project_sphere(x: &Vector, radius: f64) -> Result<Vector, GeometryError> {
    if !all_finite(x) {
        return Err(GeometryError::NonFinite);
    }
    let norm = x.norm();
    if norm == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    Ok(x / norm * radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use proptest::prelude::*;

    #[test]
    fn projection_examples() {
        let p = project_sphere(&dvector![3.0, 4.0], 1.0).unwrap();
        assert_abs_diff_eq!(p, dvector![0.6, 0.8], epsilon = 1e-16);
        assert_eq!(project_sphere(&dvector![1.0, 0.0, 0.0], 1.0).unwrap(), dvector![1.0, 0.0, 0.0]);
        assert_eq!(project_sphere(&dvector![0.0, 0.0], 1.0), Err(GeometryError::ZeroVector));
        assert_eq!(
            project_sphere(&dvector![f64::NAN, 1.0], 1.0),
            Err(GeometryError::NonFinite)
        );
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(SphereSurface::new(3, 0.0).is_err());
        assert!(SphereSurface::new(3, -1.0).is_err());
        assert!(SphereSurface::new(0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn projected_norm_equals_radius(
            v in prop::collection::vec(-1e3f64..1e3, 1..8),
            radius in 1e-3f64..1e3,
        ) {
            let x = Vector::from_vec(v);
            prop_assume!(x.norm() > 1e-9);
            let p = project_sphere(&x, radius).unwrap();
            prop_assert!((p.norm() - radius).abs() <= 1e-12 * radius);
        }
    }
}
