use super::ObjectiveError;
use crate::{Matrix, Vector};

/// Eigen-decomposition of a symmetric matrix with ascending eigenvalues.
///
/// Column `i` of `vectors` is the unit eigenvector for `values[i]`, signed so
/// that its entry of largest magnitude (first one on ties) is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vector,
    pub vectors: Matrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn vector(&self, i: usize) -> Vector {
        self.vectors.column(i).into_owned()
    }

    /// Smallest eigenvalue in absolute value.
    pub fn min_abs(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// Largest eigenvalue in absolute value (the spectral norm).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

/// Checks symmetry with absolute tolerance `1e-12 · max|aᵢⱼ|`.
pub fn check_symmetric(a: &Matrix) -> Result<(), ObjectiveError> {
    if !a.is_square() {
        return Err(ObjectiveError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(ObjectiveError::NonFinite);
    }
    let tol = 1e-12 * a.amax();
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (a[(i, j)] - a[(j, i)]).abs();
            if gap > tol {
                return Err(ObjectiveError::NotSymmetric { row: i, col: j, gap });
            }
        }
    }
    Ok(())
}

const MAX_SWEEPS: usize = 100;

/// Dense symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized after the tolerance check. Sweeps continue until
/// the off-diagonal mass drops below `(ε · ‖A‖_F)²`.
pub fn quadratic_spectrum(a: &Matrix) -> Result<Spectrum, ObjectiveError> {
    check_symmetric(a)?;
    let n = a.nrows();
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = Matrix::identity(n, n);

    let frob = m.norm();
    let target = (f64::EPSILON * frob).powi(2);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let mut vectors = Matrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut e = v.column(i).into_owned();
        let lead = e
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |best, (k, x)| if x.abs() > best.1.abs() + 1e-14 { (k, *x) } else { best });
        if lead.1 < 0.0 {
            e = -e;
        }
        vectors.set_column(col, &e);
    }
    Ok(Spectrum { values, vectors })
}

/// Applies the rotation annihilating `m[(p, q)]` as `Jᵀ M J` and accumulates
/// `V ← V J`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.nrows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};
    use rand::Rng;

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut rng = stream(seed);
        let b = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&b + b.transpose()) * 0.5
    }

    fn residual_ok(a: &Matrix, s: &Spectrum) {
        let scale = a.norm().max(1.0);
        for i in 0..a.nrows() {
            let e = s.vector(i);
            let r = (a * &e - &e * s.values[i]).norm();
            assert!(r <= 1e-10 * scale, "residual {r} for eigenpair {i}");
        }
    }

    #[test]
    fn diagonal_gives_permuted_identity() {
        let s = quadratic_spectrum(&Matrix::from_diagonal(&dvector![3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.values, dvector![1.0, 2.0, 3.0]);
        assert_eq!(s.vectors, dmatrix![0.0, 0.0, 1.0; 1.0, 0.0, 0.0; 0.0, 1.0, 0.0]);
    }

    #[test]
    fn classic_two_by_two() {
        let s = quadratic_spectrum(&dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s.values, dvector![-1.0, 1.0], epsilon = 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.vector(0), dvector![h, -h], epsilon = 1e-15);
        assert_abs_diff_eq!(s.vector(1), dvector![h, h], epsilon = 1e-15);
    }

    #[test]
    fn random_eight_by_eight_residuals_and_invariants() {
        for seed in 0..5 {
            let a = random_symmetric(8, seed);
            let s = quadratic_spectrum(&a).unwrap();
            residual_ok(&a, &s);
            let gram = s.vectors.transpose() * &s.vectors;
            assert!((gram - Matrix::identity(8, 8)).amax() <= 1e-10);
            assert!((a.trace() - s.values.sum()).abs() <= 1e-10 * a.norm());
            assert!(s.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn agrees_with_nalgebra_symmetric_eigen() {
        let a = random_symmetric(12, 99);
        let ours = quadratic_spectrum(&a).unwrap();
        let mut theirs: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.values.iter().zip(theirs) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_asymmetric_and_non_square() {
        assert!(matches!(
            quadratic_spectrum(&dmatrix![1.0, 2.0; 2.5, 1.0]),
            Err(ObjectiveError::NotSymmetric { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            quadratic_spectrum(&Matrix::zeros(2, 3)),
            Err(ObjectiveError::NotSquare { .. })
        ));
    }

    #[test]
    fn repeated_eigenvalues_and_zero_matrix() {
        let s = quadratic_spectrum(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(s.values, dvector![0.0, 0.0, 0.0]);
        let a = dmatrix![2.0, 1.0, 0.0; 1.0, 2.0, 0.0; 0.0, 0.0, 1.0];
        let s = quadratic_spectrum(&a).unwrap();
        assert_abs_diff_eq!(s.values, dvector![1.0, 1.0, 3.0], epsilon = 1e-14);
        residual_ok(&a, &s);
    }
}
