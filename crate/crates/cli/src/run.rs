//! Single runs: dispatch, trace writing and the exit-code contract.

use log::{error, info};
use surfmin::analysis::fit_linear_rate;
use surfmin::objectives::problems::ExampleProblem;
use surfmin::solvers::{solve, SolverError, Termination, Trace};

use crate::config::{ConfigError, RunConfig};
use crate::output::{emit_trace, TraceHeader};

/// Converged, or a stationarity certificate.
pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_MAX_ITER: i32 = 2;
/// Configuration, solver or output failure.
pub const EXIT_ERROR: i32 = 3;

/// Validates `config` and runs it. A configuration problem is an outer
/// error; a solver failure is returned inside.
pub fn execute(config: &RunConfig) -> Result<(ExampleProblem, Result<Trace, SolverError>), ConfigError> {
    let (problem, x0) = config.validate()?;
    let run = solve(&problem, config.algorithm, &config.solver, &x0);
    Ok((problem, run))
}

pub fn exit_code(termination: &Termination) -> i32 {
    match termination {
        Termination::Converged | Termination::StationaryCertificate => EXIT_CONVERGED,
        Termination::MaxIter => EXIT_MAX_ITER,
        Termination::Failed { .. } => EXIT_ERROR,
    }
}

/// Geometric rate fitted to `f − f*` when the minimum is known, otherwise
/// to the step norms.
pub fn summary_rate(problem: &ExampleProblem, trace: &Trace) -> Option<f64> {
    let values: Vec<f64> = match problem.min_value {
        Some(min) => trace.records.iter().map(|r| (r.f - min).max(0.0)).collect(),
        None => trace.step_norms(),
    };
    fit_linear_rate(&values, 0.5).ok().map(|r| r.fitted_q)
}

pub fn summary_line(problem: &ExampleProblem, trace: &Trace) -> String {
    let last = trace.last();
    let rate = summary_rate(problem, trace).map_or_else(|| "n/a".to_string(), |q| format!("{q:.6}"));
    format!(
        "{}: f = {:.16e}, proj_grad_norm = {:.3e}, iterations = {}, fitted_q = {}",
        termination_label(&trace.termination),
        last.f,
        last.proj_grad_norm,
        trace.iterations(),
        rate
    )
}

fn termination_label(t: &Termination) -> String {
    match t {
        Termination::Converged => "converged".into(),
        Termination::MaxIter => "max-iter".into(),
        Termination::StationaryCertificate => "stationary-certificate".into(),
        Termination::Failed { code, .. } => format!("failed ({code})"),
    }
}

/// Runs `config`, writes the trace when an output path is set, prints the
/// summary line and returns the exit code.
pub fn run_command(config: &RunConfig) -> i32 {
    let (problem, run) = match execute(config) {
        Ok(done) => done,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let trace = match run {
        Ok(trace) => trace,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    if let Some(path) = &config.output {
        let header = TraceHeader::new(config, &problem, &trace);
        if let Err(e) = emit_trace(&header, &trace, config.format, path) {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
        info!("trace written to {}", path.display());
    }
    if let Termination::Failed { message, .. } = &trace.termination {
        eprintln!("error: {message}");
    }
    println!("{}", summary_line(&problem, &trace));
    exit_code(&trace.termination)
}

#[cfg(test)]
mod tests {
    use super::*;
    use surfmin::solvers::Algorithm;

    #[test]
    fn exit_codes_follow_termination() {
        let mut config = RunConfig::new("e2", Algorithm::Ffw);
        config.solver.max_iter = 1000;
        assert_eq!(run_command(&config), EXIT_MAX_ITER);
        assert_eq!(run_command(&RunConfig::new("approx-linear:eps=0.1", Algorithm::Ffw)), EXIT_CONVERGED);
        assert_eq!(run_command(&RunConfig::new("minstat:r=2", Algorithm::Gpa3)), EXIT_ERROR);
    }

    #[test]
    fn summary_mentions_iterations_and_rate() {
        let config = RunConfig::new("quad-diag:1,2,10", Algorithm::Eigmin);
        let (problem, run) = execute(&config).unwrap();
        let trace = run.unwrap();
        let line = summary_line(&problem, &trace);
        assert!(line.starts_with("converged"), "{line}");
        assert!(line.contains(&format!("iterations = {}", trace.iterations())));
        assert!(!line.contains("n/a"));
    }
}
