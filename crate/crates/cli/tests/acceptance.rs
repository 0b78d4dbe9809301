//! Every acceptance criterion at its stated tolerance, one test per
//! criterion, plus a negative control and a suite-level determinism check.

use std::fs;
use std::path::Path;

use surfmin_cli::suite::{acceptance_suite, criterion_ids, CriterionResult, SuiteOptions, Tolerances};

fn run_one(id: &str) -> CriterionResult {
    let report = acceptance_suite(&SuiteOptions {
        filter: vec![id.to_string()],
        ..SuiteOptions::default()
    });
    assert_eq!(report.results.len(), 1);
    let result = report.results.into_iter().next().unwrap();
    println!("{result}");
    result
}

macro_rules! criterion {
    ($name:ident, $id:literal) => {
        #[test]
        fn $name() {
            let result = run_one($id);
            assert!(result.passed, "{result}");
        }
    };
}

criterion!(c01_gpa1_lyapunov_decrease, "gpa1-lyapunov");
criterion!(c02_stationary_point_step_bound, "stationary-steps");
criterion!(c03_sphere_per_step_bound, "sphere-step-bound");
criterion!(c04_eigenvalue_rates, "eigmin-rate");
criterion!(c05_lpl_inequality_on_cap, "lpl-cap");
criterion!(c06_lpl_exponents, "lpl-exponents");
criterion!(c07_tangent_step_decrease, "gpa2-decrease");
criterion!(c08_newton_superlinear_tail, "gpa3-superlinear");
criterion!(c09_approx_linear_rate, "ffw-approx-linear");
criterion!(c10_strongly_convex_contraction, "ffw-contraction");
criterion!(c11_minstat_stationary_not_minimal, "minstat");
criterion!(c12_e2_sublinear_failure, "e2-failure");
criterion!(c13_threshold_calculator, "theta-threshold");
criterion!(c14_derivative_hygiene, "derivatives");
criterion!(c15_determinism, "determinism");

#[test]
fn criteria_are_numbered_one_to_fifteen() {
    assert_eq!(criterion_ids().len(), 15);
}

#[test]
fn zero_eigenvalue_rate_bound_fails_the_criterion() {
    let report = acceptance_suite(&SuiteOptions {
        filter: vec!["eigmin-rate".into()],
        tolerances: Tolerances {
            eigmin_tail_rate_bound: 0.0,
            ..Tolerances::default()
        },
        ..SuiteOptions::default()
    });
    println!("{}", report.results[0]);
    assert!(!report.results[0].passed);
    assert_eq!(report.exit_code(), 1);
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn full_suite_twice_writes_identical_traces() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut reports = Vec::new();
    for dir in &dirs {
        reports.push(acceptance_suite(&SuiteOptions {
            trace_dir: Some(dir.path().to_path_buf()),
            ..SuiteOptions::default()
        }));
    }
    for result in &reports[0].results {
        println!("{result}");
    }
    assert!(reports[0].all_passed());
    let (a, b) = (files(dirs[0].path()), files(dirs[1].path()));
    assert!(a.len() > 40, "{} trace files", a.len());
    assert_eq!(a.len(), b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(name_a, name_b);
        assert!(bytes_a == bytes_b, "{name_a} differs");
    }
}
