//! Constrained minimization of smooth, possibly nonconvex functions on
//! nonconvex feasible sets: spheres, proximally smooth level-set surfaces and
//! boundaries of strongly convex bodies.
//!
//! The crate is split the same way a run is assembled:
//!
//! * [`geometry`] describes feasible sets and the primitives every method
//!   needs (normals, tangent projections, chord bisection, support points).
//! * [`objectives`] holds objective oracles with their Lipschitz metadata,
//!   the quadratic-form specialization, derivative checks and the registry
//!   of worked example problems.
//! * [`solvers`] implements the iteration schemes: gradient projection with
//!   metric projection, the stationary-point driver, the normalized sphere
//!   iteration, tangent-plane projection with bisection retraction, the
//!   gradient/modified-Newton hybrid, full-step Frank-Wolfe and the minimal
//!   eigenvalue iteration.
//! * [`analysis`] certifies what a run did: fitted geometric rates, LPL
//!   constants and exponents, stationarity distances and the closed-form
//!   rate constants the methods are measured against.
//!
//! ```
//! use surfmin::objectives::problems;
//! use surfmin::solvers::{ffw_run, SolverConfig, Termination};
//!
//! let problem = problems::approx_linear(0.1).unwrap();
//! let trace = ffw_run(&problem.surface, problem.objective.as_ref(),
//!                     &SolverConfig::default(), &problem.default_x0).unwrap();
//! assert_eq!(trace.termination, Termination::Converged);
//! ```

pub mod analysis;
pub mod geometry;
pub mod objectives;
pub mod sampling;
pub mod solvers;

/// Dense point or direction in the ambient Euclidean space.
pub type Vector = nalgebra::DVector<f64>;

/// Dense square matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

pub(crate) fn all_finite(x: &Vector) -> bool {
    x.iter().all(|v| v.is_finite())
}
