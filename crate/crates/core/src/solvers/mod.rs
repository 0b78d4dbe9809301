//! Iteration schemes. Every run returns a [`Trace`] with one
//! [`IterationRecord`] per visited point.
//!
//! Record `k` describes `x_k` and the step that leaves it: `step_norm` is
//! `‖x_{k+1} − x_k‖`, or `0` when the run stops at `x_k` without stepping.
//! A run stops when the step norm drops below `tol_x` (the final point is
//! then `x_{k+1}`), when the projected gradient norm drops below `pg_tol`, or
//! after `max_iter` steps.

mod ffw;
mod gpa1;
mod gpa2;
mod gpa3;
mod sphere;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{GeometryError, DEFAULT_BISECT_TOL};
use crate::objectives::problems::ExampleProblem;
use crate::objectives::ObjectiveError;
use crate::Vector;

pub use ffw::ffw_run;
pub use gpa1::{estimate_spread, gpa1_run, stationary_point_solve, StationaryOutcome, DELTA_F_SAFETY};
pub use gpa2::{gpa2_run, tangent_step_bound};
pub use gpa3::{gpa3_run, newton_kkt_residual, KktSystem, NEWTON_REFRESH_STEPS};
pub use sphere::{eigmin_run, sphere_gpa_run, EigminOutcome};

/// Numeric parameters shared by all methods. `None` selects the
/// per-method default.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Step size; defaults to `1/L₁` on the sphere and `t₀` for the
    /// tangent-plane methods.
    pub t: Option<f64>,
    /// Penalty constant `C` of the projection method.
    pub c: Option<f64>,
    /// Target stationarity `ε` of the stationary-point driver.
    pub eps: f64,
    pub max_iter: usize,
    pub tol_x: f64,
    pub pg_tol: f64,
    pub bisect_tol: f64,
    /// Stop threshold on `‖F‖` in the Newton phase.
    pub newton_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t: None,
            c: None,
            eps: 1e-3,
            max_iter: 100_000,
            tol_x: 1e-12,
            pg_tol: 1e-12,
            bisect_tol: DEFAULT_BISECT_TOL,
            newton_tol: 1e-12,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        if self.max_iter == 0 {
            return Err(SolverError::ConfigInvalid("max_iter must be positive".into()));
        }
        for (name, v) in [
            ("tol_x", self.tol_x),
            ("pg_tol", self.pg_tol),
            ("newton_tol", self.newton_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SolverError::ConfigInvalid(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !(self.bisect_tol > 0.0 && self.bisect_tol.is_finite()) {
            return Err(SolverError::ConfigInvalid(format!(
                "bisect_tol must be positive, got {}",
                self.bisect_tol
            )));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(SolverError::ConfigInvalid(format!("eps must be positive, got {}", self.eps)));
        }
        if let Some(t) = self.t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(SolverError::ConfigInvalid(format!("t must be positive, got {t}")));
            }
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(SolverError::ConfigInvalid(format!("C must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Gpa1,
    Stationary,
    SphereGpa,
    Gpa2,
    Gpa3,
    Ffw,
    Eigmin,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Gpa1,
        Algorithm::Stationary,
        Algorithm::SphereGpa,
        Algorithm::Gpa2,
        Algorithm::Gpa3,
        Algorithm::Ffw,
        Algorithm::Eigmin,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Gpa1 => "gpa1",
            Algorithm::Stationary => "stationary",
            Algorithm::SphereGpa => "sphere-gpa",
            Algorithm::Gpa2 => "gpa2",
            Algorithm::Gpa3 => "gpa3",
            Algorithm::Ffw => "ffw",
            Algorithm::Eigmin => "eigmin",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| SolverError::ConfigInvalid(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Gradient,
    Newton,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Gradient => "gradient",
            Phase::Newton => "newton",
        })
    }
}

fn serialize_vector<S: Serializer>(x: &Vector, s: S) -> Result<S::Ok, S::Error> {
    x.as_slice().serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    #[serde(serialize_with = "serialize_vector")]
    pub x: Vector,
    pub f: f64,
    /// `‖P_{T_x} f′(x)‖`.
    pub proj_grad_norm: f64,
    /// `‖x_{k+1} − x_k‖`.
    pub step_norm: f64,
    /// `‖Kx − f′‖ − (Kx − f′, x)` with `K = 1/t`; sphere iterations only.
    pub residual_z: Option<f64>,
    /// Phase tag; gradient/Newton hybrid only.
    pub phase: Option<Phase>,
    /// `‖F(x, λ)‖` of the KKT system; gradient/Newton hybrid only.
    pub kkt_residual: Option<f64>,
}

impl IterationRecord {
    pub(crate) fn new(k: usize, x: &Vector, f: f64, proj_grad_norm: f64, step_norm: f64) -> Self {
        Self {
            k,
            x: x.clone(),
            f,
            proj_grad_norm,
            step_norm,
            residual_z: None,
            phase: None,
            kkt_residual: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIter,
    /// `f′(x) = 0`: every feasible point minimizes the linearization.
    StationaryCertificate,
    Failed { code: String, message: String },
}

impl Termination {
    pub fn is_success(&self) -> bool {
        matches!(self, Termination::Converged | Termination::StationaryCertificate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub algorithm: Algorithm,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    #[serde(serialize_with = "serialize_vector")]
    pub final_x: Vector,
    /// Theoretical constants in force for the run (`t₀`, `C`, `δ`, `N`, ...).
    pub constants: BTreeMap<String, f64>,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("traces are nonempty")
    }

    /// The `f` column.
    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f).collect()
    }

    /// The `step_norm` column.
    pub fn step_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.step_norm).collect()
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{algorithm} does not support {surface} surfaces")]
    UnsupportedSurface { algorithm: Algorithm, surface: &'static str },
    #[error("{0} needs a Hessian oracle")]
    MissingHessian(Algorithm),
    #[error("{0} needs a quadratic-form problem")]
    NotQuadratic(Algorithm),
    #[error("pre-normalization vector vanished")]
    DegenerateStep,
    #[error("KKT Jacobian is singular: sigma1 = {sigma1:e} <= floor {floor:e}")]
    SingularJacobian { sigma1: f64, floor: f64 },
    #[error("Newton residual kept growing after {fallbacks} fallbacks to the gradient phase")]
    NewtonDiverged { fallbacks: usize },
    #[error("non-finite value encountered at iteration {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

impl SolverError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SolverError::ConfigInvalid(_) => "config-invalid",
            SolverError::UnsupportedSurface { .. } => "unsupported-surface",
            SolverError::MissingHessian(_) => "missing-hessian",
            SolverError::NotQuadratic(_) => "not-quadratic",
            SolverError::DegenerateStep => "degenerate-step",
            SolverError::SingularJacobian { .. } => "singular-jacobian",
            SolverError::NewtonDiverged { .. } => "newton-diverged",
            SolverError::NonFinite(_) => "non-finite",
            SolverError::Geometry(e) => match e {
                GeometryError::ZeroVector => "zero-vector",
                GeometryError::OffSurface { .. } => "off-surface",
                GeometryError::DegenerateNormal => "degenerate-normal",
                GeometryError::NoSignChange { .. } => "no-sign-change",
                GeometryError::StepExceedsReach { .. } => "step-exceeds-reach",
                GeometryError::ZeroDirection => "zero-direction",
                GeometryError::NonFinite => "non-finite",
                GeometryError::DimensionMismatch { .. } => "dimension-mismatch",
                GeometryError::NoClosedFormProjection(_) => "no-closed-form-projection",
                GeometryError::NoSupportOracle(_) => "no-support-oracle",
                GeometryError::InvalidParameter(_) => "invalid-parameter",
            },
            SolverError::Objective(e) => match e {
                ObjectiveError::NotSymmetric { .. } => "not-symmetric",
                ObjectiveError::NotSquare { .. } => "not-square",
                ObjectiveError::MatrixParse { .. } => "matrix-parse",
                ObjectiveError::NonFinite => "non-finite",
                ObjectiveError::UnknownProblem(_) => "unknown-problem",
                ObjectiveError::InvalidParameter(_) => "invalid-parameter",
                ObjectiveError::Geometry(_) => "geometry",
            },
        }
    }
}

/// Accumulates records and constants for one run.
pub(crate) struct Recorder {
    algorithm: Algorithm,
    records: Vec<IterationRecord>,
    constants: BTreeMap<String, f64>,
}

impl Recorder {
    pub(crate) fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            records: Vec::new(),
            constants: BTreeMap::new(),
        }
    }

    pub(crate) fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub(crate) fn constants_contain(&self, name: &str) -> bool {
        self.constants.contains_key(name)
    }

    pub(crate) fn push(&mut self, record: IterationRecord) {
        self.records.push(record);
    }

    pub(crate) fn len(&self) -> usize {
        self.records.len()
    }

    pub(crate) fn finish(self, termination: Termination, final_x: Vector) -> Trace {
        Trace {
            algorithm: self.algorithm,
            records: self.records,
            termination,
            final_x,
            constants: self.constants,
        }
    }

    /// Ends the run on a mid-run error. With no record yet the error is
    /// returned instead of an empty trace.
    pub(crate) fn fail(self, err: SolverError, at: Vector) -> Result<Trace, SolverError> {
        if self.records.is_empty() {
            return Err(err);
        }
        let termination = Termination::Failed {
            code: err.code().to_string(),
            message: err.to_string(),
        };
        Ok(self.finish(termination, at))
    }
}

/// Runs `algorithm` on a registered problem from `x0`.
pub fn solve(
    problem: &ExampleProblem,
    algorithm: Algorithm,
    config: &SolverConfig,
    x0: &Vector,
) -> Result<Trace, SolverError> {
    let obj = problem.objective.as_ref();
    match algorithm {
        Algorithm::Gpa1 => gpa1_run(&problem.surface, obj, config, x0),
        Algorithm::Stationary => stationary_point_solve(&problem.surface, obj, config, x0).map(|o| o.trace),
        Algorithm::SphereGpa => {
            require_unit_sphere(&problem.surface, algorithm)?;
            sphere_gpa_run(obj, config, x0)
        }
        Algorithm::Gpa2 => gpa2_run(&problem.surface.as_level_set(), obj, config, x0),
        Algorithm::Gpa3 => gpa3_run(&problem.surface, obj, config, x0),
        Algorithm::Ffw => ffw_run(&problem.surface, obj, config, x0),
        Algorithm::Eigmin => {
            let form = problem.quadratic.as_ref().ok_or(SolverError::NotQuadratic(algorithm))?;
            eigmin_run(form, config, x0, true).map(|o| o.trace)
        }
    }
}

pub(crate) fn require_unit_sphere(surface: &crate::geometry::Surface, algorithm: Algorithm) -> Result<(), SolverError> {
    match surface {
        crate::geometry::Surface::Sphere(s) if s.radius() == 1.0 => Ok(()),
        other => Err(SolverError::UnsupportedSurface {
            algorithm,
            surface: other.kind(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_ids_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.id().parse::<Algorithm>().unwrap(), a);
        }
        assert!("newton".parse::<Algorithm>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            max_iter: 0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            t: Some(-1.0),
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
