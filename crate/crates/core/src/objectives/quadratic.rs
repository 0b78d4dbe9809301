use super::{quadratic_spectrum, Objective, ObjectiveError, Spectrum};
use crate::{Matrix, Vector};

/// Homogeneous quadratic `f(x) = (Ax, x)` with symmetric `A`.
///
/// The spectrum is computed once at construction. On the unit sphere
/// `min f = λ₁`, attained at `±e₁`.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    a: Matrix,
    spectrum: Spectrum,
    lipschitz: Option<f64>,
}

impl QuadraticForm {
    /// Rejects matrices that are asymmetric beyond `1e-12 · max|aᵢⱼ|` and
    /// symmetrizes the rest.
    pub fn new(a: Matrix) -> Result<Self, ObjectiveError> {
        let spectrum = quadratic_spectrum(&a)?;
        let a = (&a + a.transpose()) * 0.5;
        let lipschitz = Some(2.0 * spectrum.max_abs());
        Ok(Self { a, spectrum, lipschitz })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self, ObjectiveError> {
        if diag.is_empty() {
            return Err(ObjectiveError::InvalidParameter("empty diagonal".into()));
        }
        Self::new(Matrix::from_diagonal(&Vector::from_column_slice(diag)))
    }

    pub fn from_text(text: &str) -> Result<Self, ObjectiveError> {
        Self::new(parse_matrix(text)?)
    }

    /// Drops the closed-form `L`, so callers fall back to sampling.
    pub fn without_registered_lipschitz(mut self) -> Self {
        self.lipschitz = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `(Ax, x) − λ₁` evaluated in the eigenbasis as `Σ (λᵢ − λ₁)(x, eᵢ)²`
    /// for unit `x`, which avoids cancellation near the minimizer.
    pub fn rayleigh_gap(&self, x: &Vector) -> f64 {
        let l1 = self.spectrum.min();
        (0..self.dim())
            .map(|i| {
                let c = self.spectrum.vectors.column(i).dot(x);
                (self.spectrum.values[i] - l1) * c * c
            })
            .sum()
    }

    /// `A + shift · I`, reusing the eigenvectors.
    pub fn shifted(&self, shift: f64) -> Self {
        let n = self.dim();
        let spectrum = Spectrum {
            values: self.spectrum.values.add_scalar(shift),
            vectors: self.spectrum.vectors.clone(),
        };
        let lipschitz = Some(2.0 * spectrum.max_abs());
        Self {
            a: &self.a + Matrix::identity(n, n) * shift,
            spectrum,
            lipschitz,
        }
    }
}

impl Objective for QuadraticForm {
    fn value(&self, x: &Vector) -> f64 {
        (&self.a * x).dot(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.a * x * 2.0
    }

    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        Some(&self.a * 2.0)
    }

    fn has_hessian(&self) -> bool {
        true
    }

    /// `2 · max(|λ₁|, |λₙ|)`.
    fn grad_lipschitz(&self) -> f64 {
        2.0 * self.spectrum.max_abs()
    }

    /// `max ‖2Ax‖` over the unit sphere.
    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Parses a dense square matrix from whitespace-separated rows, one row per
/// line. Blank lines and lines starting with `#` are skipped.
pub fn parse_matrix(text: &str) -> Result<Matrix, ObjectiveError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ObjectiveError::MatrixParse {
                        line: idx + 1,
                        message: format!("'{tok}' is not a finite number"),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(ObjectiveError::MatrixParse {
                    line: idx + 1,
                    message: format!("expected {} entries, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ObjectiveError::MatrixParse {
            line: 0,
            message: "no matrix rows".into(),
        });
    }
    let (n, m) = (rows.len(), rows[0].len());
    if n != m {
        return Err(ObjectiveError::NotSquare { rows: n, cols: m });
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}
