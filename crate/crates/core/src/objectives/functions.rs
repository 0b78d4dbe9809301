use super::Objective;
use crate::{Matrix, Vector};

/// `f(x) = (c, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    c: Vector,
}

impl Linear {
    pub fn new(c: Vector) -> Self {
        Self { c }
    }

    pub fn coefficients(&self) -> &Vector {
        &self.c
    }
}

impl Objective for Linear {
    fn value(&self, x: &Vector) -> f64 {
        self.c.dot(x)
    }

    fn gradient(&self, _x: &Vector) -> Vector {
        self.c.clone()
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        Some(Matrix::zeros(x.len(), x.len()))
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn grad_lipschitz(&self) -> f64 {
        0.0
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.c.norm())
    }
}

/// `f(x) = (c, x) + (ε/2)‖x − d‖²`, whose gradient `c + ε(x − d)` is
/// `ε`-Lipschitz.
///
/// On the unit sphere the function is approximately linear when
/// `‖f′(0)‖ > 2ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxLinear {
    c: Vector,
    d: Vector,
    eps: f64,
    lipschitz: Option<f64>,
}

impl ApproxLinear {
    pub fn new(c: Vector, d: Vector, eps: f64) -> Self {
        assert_eq!(c.len(), d.len(), "c and d must share a dimension");
        Self {
            c,
            d,
            eps,
            lipschitz: None,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `f′(0) = c − εd`.
    pub fn gradient_at_origin(&self) -> Vector {
        &self.c - &self.d * self.eps
    }
}

impl Objective for ApproxLinear {
    fn value(&self, x: &Vector) -> f64 {
        self.c.dot(x) + 0.5 * self.eps * (x - &self.d).norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.c + (x - &self.d) * self.eps
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        Some(Matrix::identity(x.len(), x.len()) * self.eps)
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn grad_lipschitz(&self) -> f64 {
        self.eps
    }

    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// `f(x, y) = y − p x²` on the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicObjective {
    p: f64,
}

impl ParabolicObjective {
    pub fn new(p: f64) -> Self {
        Self { p }
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl Objective for ParabolicObjective {
    fn value(&self, x: &Vector) -> f64 {
        x[1] - self.p * x[0] * x[0]
    }

    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_vec(vec![-2.0 * self.p * x[0], 1.0])
    }

    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        Some(Matrix::from_diagonal(&Vector::from_vec(vec![-2.0 * self.p, 0.0])))
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn grad_lipschitz(&self) -> f64 {
        2.0 * self.p.abs()
    }

    /// `max ‖f′‖ = √(1 + 4p²)` over the strip `|x| ≤ 1`, which contains the
    /// registered circle and every tangent step taken from it.
    fn lipschitz(&self) -> Option<f64> {
        Some((1.0 + 4.0 * self.p * self.p).sqrt())
    }
}

/// `f(x, y) = ψ(x) − y` with `ψ(x) = −x²/2` for `x ≤ 0` and `0` otherwise.
///
/// `ψ` is C¹ with a kink in `ψ′` at the origin, so no Hessian is offered.
#[derive(Clone, Debug, PartialEq)]
pub struct MinStatObjective {
    r: f64,
}

impl MinStatObjective {
    /// `r` is the radius of the ball the objective is registered on; it only
    /// enters the Lipschitz bound.
    pub fn new(r: f64) -> Self {
        Self { r }
    }

    fn psi(x: f64) -> f64 {
        if x <= 0.0 {
            -0.5 * x * x
        } else {
            0.0
        }
    }

    fn psi_prime(x: f64) -> f64 {
        if x <= 0.0 {
            -x
        } else {
            0.0
        }
    }
}

impl Objective for MinStatObjective {
    fn value(&self, x: &Vector) -> f64 {
        Self::psi(x[0]) - x[1]
    }

    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_vec(vec![Self::psi_prime(x[0]), -1.0])
    }

    fn grad_lipschitz(&self) -> f64 {
        1.0
    }

    /// `|ψ′| ≤ r` on the ball boundary.
    fn lipschitz(&self) -> Option<f64> {
        Some((1.0 + self.r * self.r).sqrt())
    }
}

/// Strongly convex `f(x) = ‖x − target‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedSquare {
    target: Vector,
    lipschitz: f64,
}

impl ShiftedSquare {
    /// `lipschitz` bounds `‖f′‖ = 2‖x − target‖` on the region of interest.
    pub fn new(target: Vector, lipschitz: f64) -> Self {
        Self { target, lipschitz }
    }

    pub fn target(&self) -> &Vector {
        &self.target
    }

    /// Strong convexity constant.
    pub fn convexity(&self) -> f64 {
        2.0
    }
}

impl Objective for ShiftedSquare {
    fn value(&self, x: &Vector) -> f64 {
        (x - &self.target).norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (x - &self.target) * 2.0
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        Some(Matrix::identity(x.len(), x.len()) * 2.0)
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn grad_lipschitz(&self) -> f64 {
        2.0
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// Objective assembled from closures, for user-supplied problems and tests.
pub struct FnObjective<F, G> {
    value: F,
    gradient: G,
    grad_lipschitz: f64,
    lipschitz: Option<f64>,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    pub fn new(value: F, gradient: G, grad_lipschitz: f64) -> Self {
        Self {
            value,
            gradient,
            grad_lipschitz,
            lipschitz: None,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }

    fn grad_lipschitz(&self) -> f64 {
        self.grad_lipschitz
    }

    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}
