//! Seeded sampling of directions and surface points.
//!
//! All randomness derives from one 64-bit seed fed to a SplitMix64 stream.
//! Quasi-random directions come from a Halton sequence whose coordinates are
//! shifted modulo one by seeded offsets (Cranley-Patterson rotation) and then
//! mapped to Gaussian pairs by Box-Muller, so the same seed always yields the
//! same sample set in the same order.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

use crate::geometry::{GeometryError, Surface, DEFAULT_BISECT_TOL};
use crate::Vector;

/// The generator behind every seeded draw in the crate.
pub fn stream(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|p| *p * *p <= candidate).all(|p| !candidate.is_multiple_of(*p)) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut scale = inv_base;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    value
}

/// Endless stream of quasi-random unit vectors in `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct QuasiSphere {
    dim: usize,
    primes: Vec<u64>,
    shifts: Vec<f64>,
    index: u64,
}

impl QuasiSphere {
    pub fn new(dim: usize, seed: u64) -> Self {
        let coords = 2 * dim.div_ceil(2);
        let mut rng = stream(seed);
        let shifts = (0..coords).map(|_| rng.random::<f64>()).collect();
        Self {
            dim,
            primes: first_primes(coords),
            shifts,
            index: 0,
        }
    }

    fn uniform(&self, coord: usize) -> f64 {
        let u = radical_inverse(self.index, self.primes[coord]) + self.shifts[coord];
        let u = u - u.floor();
        u.max(f64::MIN_POSITIVE)
    }
}

impl Iterator for QuasiSphere {
    type Item = Vector;

    fn next(&mut self) -> Option<Vector> {
        loop {
            self.index += 1;
            let mut gauss = Vec::with_capacity(self.primes.len());
            for pair in 0..self.primes.len() / 2 {
                let u1 = self.uniform(2 * pair);
                let u2 = self.uniform(2 * pair + 1);
                let r = (-2.0 * u1.ln()).sqrt();
                let angle = std::f64::consts::TAU * u2;
                gauss.push(r * angle.cos());
                gauss.push(r * angle.sin());
            }
            gauss.truncate(self.dim);
            let v = Vector::from_vec(gauss);
            let norm = v.norm();
            if norm > 0.0 && norm.is_finite() {
                return Some(v / norm);
            }
        }
    }
}

/// Uniformly random unit vector drawn from the seeded stream.
pub fn random_direction(dim: usize, seed: u64) -> Vector {
    let mut rng = stream(seed);
    loop {
        let v = Vector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}

impl Surface {
    /// Maps a unit direction to a surface point: scaled for spheres,
    /// offset from the center for ball boundaries and retracted along the
    /// radial chord for level sets.
    pub fn point_in_direction(&self, u: &Vector) -> Result<Vector, GeometryError> {
        self.check_dim(u)?;
        match self {
            Surface::Sphere(s) => Ok(u * s.radius()),
            Surface::BallBoundary(b) => Ok(b.center() + u * b.radius()),
            Surface::LevelSet(l) => l.radial_point(u, DEFAULT_BISECT_TOL),
        }
    }

    /// `count` quasi-random surface points for the given seed.
    pub fn quasi_random_points(&self, count: usize, seed: u64) -> Result<Vec<Vector>, GeometryError> {
        QuasiSphere::new(self.dim(), seed)
            .take(count)
            .map(|u| self.point_in_direction(&u))
            .collect()
    }

    /// A single seeded random surface point.
    pub fn random_point(&self, seed: u64) -> Result<Vector, GeometryError> {
        self.point_in_direction(&random_direction(self.dim(), seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LevelSetSurface, SphereSurface};
    use nalgebra::dvector;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert_eq!(radical_inverse(1, 3), 1.0 / 3.0);
    }

    #[test]
    fn quasi_sphere_is_deterministic_and_unit() {
        let a: Vec<Vector> = QuasiSphere::new(5, 42).take(200).collect();
        let b: Vec<Vector> = QuasiSphere::new(5, 42).take(200).collect();
        assert_eq!(a, b);
        for v in &a {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
        let c: Vec<Vector> = QuasiSphere::new(5, 43).take(200).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn quasi_sphere_covers_both_hemispheres_evenly() {
        let n = 4000;
        let positive = QuasiSphere::new(3, 7).take(n).filter(|v| v[2] > 0.0).count();
        let frac = positive as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "fraction {frac}");
    }

    #[test]
    fn odd_dimension_and_one_dimension() {
        let v: Vec<Vector> = QuasiSphere::new(1, 0).take(10).collect();
        assert!(v.iter().all(|x| x.len() == 1 && x[0].abs() == 1.0));
    }

    #[test]
    fn surface_points_are_members() {
        let surfaces = [
            Surface::Sphere(SphereSurface::new(3, 2.0).unwrap()),
            Surface::LevelSet(LevelSetSurface::circle(dvector![0.0, 0.5], 0.5)),
            Surface::LevelSet(LevelSetSurface::ellipsoid(dvector![0.0, 0.0, 0.0], &[1.0, 1.2, 1.5]).unwrap()),
        ];
        for s in &surfaces {
            for x in s.quasi_random_points(100, 3).unwrap() {
                assert!(s.membership_residual(&x) <= 1e-11, "{} residual", s.kind());
            }
            let x = s.random_point(9).unwrap();
            assert!(s.membership_residual(&x) <= 1e-11);
        }
    }
}
