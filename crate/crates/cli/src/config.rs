//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! [run]
//! problem = lpl2d:p=0.5
//! algorithm = gpa2
//! x0 = registry-default      # or random:<seed>, or 0.1,0.2
//!
//! [solver]
//! max_iter = 500
//!
//! [output]
//! path = trace.jsonl
//! format = jsonl             # or csv
//! ```
//!
//! Keys before the first section header may come from any section.

use std::path::PathBuf;
use std::str::FromStr;

use log::info;
use serde::Serialize;
use surfmin::geometry::Surface;
use surfmin::objectives::problems::{self, ExampleProblem};
use surfmin::objectives::value_lipschitz;
use surfmin::solvers::{tangent_step_bound, Algorithm, SolverConfig};
use surfmin::Vector;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for '{key}': {message}")]
    Validation { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Starting point of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartPoint {
    RegistryDefault,
    /// Seeded uniform point on the surface.
    Random(u64),
    Explicit(Vec<f64>),
}

impl StartPoint {
    pub fn resolve(&self, surface: &Surface, problem: &ExampleProblem) -> Result<Vector, ConfigError> {
        match self {
            StartPoint::RegistryDefault => Ok(problem.default_x0.clone()),
            StartPoint::Random(seed) => surface.random_point(*seed).map_err(|e| invalid("x0", e.to_string())),
            StartPoint::Explicit(v) => Ok(Vector::from_column_slice(v)),
        }
    }
}

impl FromStr for StartPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "registry-default" {
            return Ok(StartPoint::RegistryDefault);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .trim()
                .parse()
                .map(StartPoint::Random)
                .map_err(|_| format!("'{seed}' is not a 64-bit seed"));
        }
        let values = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| format!("'{s}' is neither registry-default, random:<seed> nor a comma-separated vector"))?;
        Ok(StartPoint::Explicit(values))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    Jsonl,
    Csv,
}

impl FromStr for TraceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" => Ok(TraceFormat::Jsonl),
            "csv" => Ok(TraceFormat::Csv),
            other => Err(format!("unknown format '{other}', expected jsonl or csv")),
        }
    }
}

/// A validated run description.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub problem: String,
    pub algorithm: Algorithm,
    pub x0: StartPoint,
    pub solver: SolverConfig,
    /// Not echoed into trace headers, so that traces written to different
    /// paths stay byte-identical.
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub format: TraceFormat,
}

impl RunConfig {
    pub fn new(problem: impl Into<String>, algorithm: Algorithm) -> Self {
        Self {
            problem: problem.into(),
            algorithm,
            x0: StartPoint::RegistryDefault,
            solver: SolverConfig::default(),
            output: None,
            format: TraceFormat::Jsonl,
        }
    }

    /// Resolves the problem and starting point and checks that the
    /// algorithm applies to them.
    pub fn validate(&self) -> Result<(ExampleProblem, Vector), ConfigError> {
        let problem = problems::lookup(&self.problem).map_err(|e| invalid("problem", e.to_string()))?;
        let surface = &problem.surface;
        let x0 = self.x0.resolve(surface, &problem)?;
        if x0.len() != surface.dim() {
            return Err(invalid("x0", format!("expected {} coordinates, got {}", surface.dim(), x0.len())));
        }
        if let Err(e) = surface.check_membership(&x0) {
            return Err(invalid("x0", e.to_string()));
        }
        let s = &self.solver;
        if s.max_iter == 0 {
            return Err(invalid("max_iter", "must be positive"));
        }
        for (key, v) in [("eps", s.eps), ("bisect_tol", s.bisect_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, format!("must be positive, got {v}")));
            }
        }
        for (key, v) in [("tol_x", s.tol_x), ("pg_tol", s.pg_tol), ("newton_tol", s.newton_tol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(key, format!("must be finite and nonnegative, got {v}")));
            }
        }
        for (key, v) in [("t", s.t), ("c", s.c)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(key, format!("must be positive, got {v}")));
                }
            }
        }
        match self.algorithm {
            Algorithm::Gpa3 if !problem.has_hessian() => {
                return Err(invalid(
                    "algorithm",
                    format!("gpa3 needs a Hessian oracle, which {} does not provide", problem.id),
                ));
            }
            Algorithm::Eigmin if problem.quadratic.is_none() => {
                return Err(invalid("algorithm", format!("eigmin needs a quadratic form, {} is not one", problem.id)));
            }
            Algorithm::SphereGpa | Algorithm::Gpa3 | Algorithm::Eigmin if !is_unit_sphere(surface) => {
                return Err(invalid("algorithm", format!("{} runs on the unit sphere only", self.algorithm)));
            }
            Algorithm::Gpa1 | Algorithm::Stationary if matches!(surface, Surface::LevelSet(_)) => {
                return Err(invalid(
                    "algorithm",
                    format!("{} needs a closed-form projection, unavailable on level-set surfaces", self.algorithm),
                ));
            }
            Algorithm::Ffw if !matches!(surface, Surface::Sphere(_) | Surface::BallBoundary(_)) => {
                return Err(invalid("algorithm", "ffw needs a support-point oracle (sphere or ball boundary)"));
            }
            Algorithm::Gpa2 => {
                if let Some(t) = s.t {
                    let level_set = surface.as_level_set();
                    let obj = problem.objective.as_ref();
                    let l = value_lipschitz(surface, obj).map_err(|e| invalid("problem", e.to_string()))?;
                    let t0 = tangent_step_bound(obj.grad_lipschitz(), l, level_set.reach());
                    if t >= 2.0 * t0 {
                        return Err(invalid(
                            "t",
                            format!("step {t} outside (0, 2 t0) = (0, {}) with t0 = 1/(L1 + 2L/R)", 2.0 * t0),
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok((problem, x0))
    }
}

fn is_unit_sphere(surface: &Surface) -> bool {
    matches!(surface, Surface::Sphere(s) if s.radius() == 1.0)
}

const RUN_KEYS: &[&str] = &["problem", "algorithm", "x0"];
const SOLVER_KEYS: &[&str] = &[
    "t", "c", "eps", "max_iter", "tol_x", "pg_tol", "bisect_tol", "newton_tol", "seed",
];
const OUTPUT_KEYS: &[&str] = &["path", "format"];

fn section_keys(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "run" => Some(RUN_KEYS),
        "solver" => Some(SOLVER_KEYS),
        "output" => Some(OUTPUT_KEYS),
        _ => None,
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| invalid(key, format!("'{value}': {e}")))
}

/// Parses and validates a configuration. Missing keys take their defaults,
/// each logged at info level.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut section: Option<&str> = None;
    let mut entries: Vec<(&str, &str, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: format!("unterminated section header '{line}'"),
            })?;
            let name = name.trim();
            if section_keys(name).is_none() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("unknown section [{name}]"),
                });
            }
            section = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let known = match section {
            Some(s) => section_keys(s).is_some_and(|keys| keys.contains(&key)),
            None => [RUN_KEYS, SOLVER_KEYS, OUTPUT_KEYS].iter().any(|keys| keys.contains(&key)),
        };
        if !known {
            return Err(ConfigError::Parse {
                line: line_no,
                message: match section {
                    Some(s) => format!("unknown key '{key}' in [{s}]"),
                    None => format!("unknown key '{key}'"),
                },
            });
        }
        if let Some((_, _, first)) = entries.iter().find(|(k, _, _)| *k == key) {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("duplicate key '{key}' (first set on line {first})"),
            });
        }
        entries.push((key, value, line_no));
    }

    let get = |key: &str| entries.iter().find(|(k, _, _)| *k == key).map(|(_, v, _)| *v);
    let problem = get("problem").ok_or_else(|| invalid("problem", "missing"))?;
    let algorithm: Algorithm = parse_value("algorithm", get("algorithm").ok_or_else(|| invalid("algorithm", "missing"))?)?;
    let mut config = RunConfig::new(problem, algorithm);

    for key in RUN_KEYS.iter().chain(SOLVER_KEYS).chain(OUTPUT_KEYS) {
        let Some(value) = get(key) else {
            if !matches!(*key, "problem" | "algorithm") {
                info!("{key} not set, using default");
            }
            continue;
        };
        let s = &mut config.solver;
        match *key {
            "x0" => config.x0 = parse_value("x0", value)?,
            "t" => s.t = Some(parse_value(key, value)?),
            "c" => s.c = Some(parse_value(key, value)?),
            "eps" => s.eps = parse_value(key, value)?,
            "max_iter" => s.max_iter = parse_value(key, value)?,
            "tol_x" => s.tol_x = parse_value(key, value)?,
            "pg_tol" => s.pg_tol = parse_value(key, value)?,
            "bisect_tol" => s.bisect_tol = parse_value(key, value)?,
            "newton_tol" => s.newton_tol = parse_value(key, value)?,
            "seed" => s.seed = parse_value(key, value)?,
            "path" => config.output = Some(PathBuf::from(value)),
            "format" => config.format = parse_value(key, value)?,
            _ => {}
        }
    }
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config("problem = lpl2d:p=0.5\nalgorithm = gpa2\n").unwrap();
        assert_eq!(c.algorithm, Algorithm::Gpa2);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.x0, StartPoint::RegistryDefault);
        assert_eq!(c.format, TraceFormat::Jsonl);
        assert_eq!(c.output, None);
    }

    #[test]
    fn sections_and_values() {
        let text = "\
[run]
problem = quad-diag:1,2,10   # trailing comment
algorithm = eigmin
x0 = random:7
[solver]
max_iter = 50
t = 0.01
[output]
path = out.csv
format = csv
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.x0, StartPoint::Random(7));
        assert_eq!(c.solver.max_iter, 50);
        assert_eq!(c.solver.t, Some(0.01));
        assert_eq!(c.format, TraceFormat::Csv);
        assert_eq!(c.output, Some(PathBuf::from("out.csv")));
    }

    #[test]
    fn gpa3_without_hessian_is_rejected() {
        let err = parse_config("problem = minstat:r=2\nalgorithm = gpa3\n").unwrap_err();
        assert!(matches!(&err, ConfigError::Validation { key, .. } if key == "algorithm"), "{err}");
    }

    #[test]
    fn gpa2_step_outside_admissible_range_is_rejected() {
        // L₁ = 1, L = √2, R = ½: t₀ = 1/(1 + 4√2)
        let err = parse_config("problem = lpl2d:p=0.5\nalgorithm = gpa2\nt = 0.5\n").unwrap_err();
        assert!(matches!(&err, ConfigError::Validation { key, message } if key == "t" && message.contains("t0")), "{err}");
        assert!(parse_config("problem = lpl2d:p=0.5\nalgorithm = gpa2\nt = 0.1\n").is_ok());
    }

    #[test]
    fn unknown_keys_and_syntax_errors_carry_lines() {
        let err = parse_config("problem = e2\nalgorithm = ffw\nspeed = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }));
        let err = parse_config("[solver]\nproblem = e2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let err = parse_config("problem = e2\nalgorithm ffw\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let err = parse_config("[nope]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        let err = parse_config("problem = e2\nproblem = scf\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn bad_values_name_their_key() {
        for (text, key) in [
            ("problem = e2\nalgorithm = ffw\nmax_iter = -1\n", "max_iter"),
            ("problem = e2\nalgorithm = fast\n", "algorithm"),
            ("problem = nowhere\nalgorithm = ffw\n", "problem"),
            ("problem = e2\nalgorithm = ffw\nx0 = 1,2,3\n", "x0"),
            ("problem = e2\nalgorithm = ffw\nx0 = 5,5\n", "x0"),
            ("problem = e2\nalgorithm = ffw\nformat = xml\n", "format"),
            ("algorithm = ffw\n", "problem"),
            ("problem = scf\nalgorithm = gpa1\n", "algorithm"),
        ] {
            let err = parse_config(text).unwrap_err();
            assert!(matches!(&err, ConfigError::Validation { key: k, .. } if k == key), "{text}: {err}");
        }
    }

    #[test]
    fn start_point_syntax() {
        assert_eq!("0.6, 0.8".parse::<StartPoint>(), Ok(StartPoint::Explicit(vec![0.6, 0.8])));
        assert!("random:x".parse::<StartPoint>().is_err());
        assert!("1,nan".parse::<StartPoint>().is_err());
    }
}
