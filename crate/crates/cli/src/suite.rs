//! Acceptance suite: each criterion reproduces one checkable claim of the
//! theory on a desk-scale fixture and reports the measured value next to
//! the bound it is held to.

use std::path::{Path, PathBuf};
use std::thread;

use nalgebra::dvector;
use surfmin::analysis::{
    check_geometric_envelope, check_rate_bound_above, chord_of_arcsin, circle_path, dominance_estimate,
    dominance_threshold, ffw_local_rate, fit_linear_rate, log_log_slope, lpl_exponent_estimate, lpl_mu_estimate,
    stationarity_distance, theory, LplSampling,
};
use surfmin::objectives::problems::{self, ExampleProblem, REGISTERED_IDS};
use surfmin::objectives::{descent_gap, fd_gradient_check, Objective};
use surfmin::sampling::QuasiSphere;
use surfmin::solvers::{stationary_point_solve, Algorithm, Phase, SolverConfig, Termination, Trace};
use surfmin::Vector;

use crate::config::{RunConfig, StartPoint, TraceFormat};
use crate::output::{emit_trace, TraceHeader};
use crate::run::execute;

/// Thresholds the criteria are held to.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Additive slack in `f(x_{k+1}) + (C/2)‖Δx‖² ≤ f(x_k)`.
    pub lyapunov_slack: f64,
    /// Multiplicative slack of the sphere per-step bound.
    pub sphere_step_slack: f64,
    /// Upper bound on the fitted tail rate of the eigenvalue iteration on
    /// `diag(1, 2, 10)`: `q₁ + 0.02` with `q₁ = 8/9`.
    pub eigmin_tail_rate_bound: f64,
    /// Additive slack in the LPL inequality on `H_{0.5}`.
    pub lpl_cap_slack: f64,
    pub exponent_alpha2: (f64, f64),
    pub exponent_alpha43: (f64, f64),
    /// Relative slack `1e-9 (1 + |f|)` in the tangent-step decrease.
    pub gpa2_decrease_slack: f64,
    pub membership: f64,
    /// Exponent in `‖F_{k+1}‖ ≤ ‖F_k‖^p` of the Newton tail.
    pub superlinear_power: f64,
    pub approx_linear_slack: f64,
    pub contraction_slack: f64,
    /// Smallest certified dominance constant accepted for the contraction
    /// check.
    pub min_dominance: f64,
    pub minstat_tol: f64,
    pub cubic_exponent: (f64, f64),
    pub e2_min_rate: f64,
    pub threshold_residual: f64,
    pub fd_gradient: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lyapunov_slack: 1e-10,
            sphere_step_slack: 1e-8,
            eigmin_tail_rate_bound: theory::eigen_asymptotic_rate(1.0, 2.0, 10.0) + 0.02,
            lpl_cap_slack: 1e-9,
            exponent_alpha2: (1.85, 2.15),
            exponent_alpha43: (1.23, 1.43),
            gpa2_decrease_slack: 1e-9,
            membership: 1e-8,
            superlinear_power: 1.2,
            approx_linear_slack: 0.05,
            contraction_slack: 1e-8,
            min_dominance: 1.5,
            minstat_tol: 1e-12,
            cubic_exponent: (2.7, 3.3),
            e2_min_rate: 0.99,
            threshold_residual: 1e-12,
            fd_gradient: 1e-5,
        }
    }
}

/// Rounding floors. Bounds that are tight in exact arithmetic cannot be
/// resolved once the compared quantities reach the rounding level of the
/// iterates.
const DISTANCE_FLOOR: f64 = 1e-13;
const STEP_FLOOR: f64 = 1e-6;
const KKT_FLOOR: f64 = 1e-12;
const KKT_ENTRY: f64 = 1e-2;

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    /// Criterion ids or numbers to run; all when empty.
    pub filter: Vec<String>,
    pub tolerances: Tolerances,
    /// Base seed for every seeded choice in the suite.
    pub seed: u64,
    /// Directory receiving one JSON-lines and one CSV trace per run.
    pub trace_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub number: usize,
    pub id: &'static str,
    pub passed: bool,
    pub measured: String,
    pub expected: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:>2} {:<20} measured {} | expected {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.number,
            self.id,
            self.measured,
            self.expected
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub results: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn get(&self, id: &str) -> Option<&CriterionResult> {
        self.results.iter().find(|r| r.id == id)
    }
}

struct Outcome {
    passed: bool,
    measured: String,
    expected: String,
}

type CriterionFn = fn(&Context) -> Result<Outcome, String>;

const CRITERIA: [(&str, CriterionFn); 15] = [
    ("gpa1-lyapunov", gpa1_lyapunov),
    ("stationary-steps", stationary_steps),
    ("sphere-step-bound", sphere_step_bound),
    ("eigmin-rate", eigmin_rate),
    ("lpl-cap", lpl_cap),
    ("lpl-exponents", lpl_exponents),
    ("gpa2-decrease", gpa2_decrease),
    ("gpa3-superlinear", gpa3_superlinear),
    ("ffw-approx-linear", ffw_approx_linear),
    ("ffw-contraction", ffw_contraction),
    ("minstat", minstat),
    ("e2-failure", e2_failure),
    ("theta-threshold", theta_threshold),
    ("derivatives", derivatives),
    ("determinism", determinism),
];

/// Criterion ids in numbering order.
pub fn criterion_ids() -> Vec<&'static str> {
    CRITERIA.iter().map(|(id, _)| *id).collect()
}

struct Context<'a> {
    tol: &'a Tolerances,
    seed: u64,
    trace_dir: Option<&'a Path>,
}

impl Context<'_> {
    /// Runs one configuration and saves its trace when a trace directory
    /// is set. Runs that end in an error are reported as failures.
    fn run(&self, name: &str, config: &RunConfig) -> Result<(ExampleProblem, Trace), String> {
        let (problem, run) = execute(config).map_err(|e| format!("{name}: {e}"))?;
        let trace = run.map_err(|e| format!("{name}: {e}"))?;
        if let Termination::Failed { message, .. } = &trace.termination {
            return Err(format!("{name}: {message}"));
        }
        if let Some(dir) = self.trace_dir {
            save_trace(dir, name, config, &problem, &trace)?;
        }
        Ok((problem, trace))
    }
}

fn save_trace(dir: &Path, name: &str, config: &RunConfig, problem: &ExampleProblem, trace: &Trace) -> Result<(), String> {
    let header = TraceHeader::new(config, problem, trace);
    for (format, ext) in [(TraceFormat::Jsonl, "jsonl"), (TraceFormat::Csv, "csv")] {
        emit_trace(&header, trace, format, &dir.join(format!("{name}.{ext}"))).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn config(problem: &str, algorithm: Algorithm, x0: StartPoint, solver: SolverConfig) -> RunConfig {
    let mut c = RunConfig::new(problem, algorithm);
    c.x0 = x0;
    c.solver = solver;
    c
}

/// Points visited by a run: every record, plus the final point when the
/// last record stepped away from it.
fn visited(trace: &Trace) -> Vec<Vector> {
    let mut points: Vec<Vector> = trace.records.iter().map(|r| r.x.clone()).collect();
    if trace.last().step_norm > 0.0 {
        points.push(trace.final_x.clone());
    }
    points
}

fn selected(filter: &[String], number: usize, id: &str) -> bool {
    filter.is_empty() || filter.iter().any(|f| f == id || f.parse::<usize>() == Ok(number))
}

/// Runs the selected criteria in parallel; results come back in numbering
/// order.
pub fn acceptance_suite(options: &SuiteOptions) -> SuiteReport {
    let ctx = Context {
        tol: &options.tolerances,
        seed: options.seed,
        trace_dir: options.trace_dir.as_deref(),
    };
    let results = thread::scope(|scope| {
        let handles: Vec<_> = CRITERIA
            .iter()
            .enumerate()
            .filter(|(i, (id, _))| selected(&options.filter, i + 1, id))
            .map(|(i, (id, check))| {
                let ctx = &ctx;
                (i + 1, *id, scope.spawn(move || check(ctx)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(number, id, handle)| {
                let outcome = handle
                    .join()
                    .unwrap_or_else(|_| Err("criterion panicked".to_string()));
                match outcome {
                    Ok(o) => CriterionResult {
                        number,
                        id,
                        passed: o.passed,
                        measured: o.measured,
                        expected: o.expected,
                    },
                    Err(message) => CriterionResult {
                        number,
                        id,
                        passed: false,
                        measured: format!("error: {message}"),
                        expected: "a completed run".into(),
                    },
                }
            })
            .collect()
    });
    SuiteReport { results }
}

fn gpa1_lyapunov(ctx: &Context) -> Result<Outcome, String> {
    let problems = ["quad-diag:1,2,10", "approx-linear:eps=0.1", "linear:0,0,1", "minstat:r=2", "dominant-ball"];
    let solver = SolverConfig {
        max_iter: 10_000,
        ..SolverConfig::default()
    };
    let mut worst = f64::NEG_INFINITY;
    let mut steps = 0;
    for id in problems {
        for s in 1..=3 {
            let seed = ctx.seed + s;
            let cfg = config(id, Algorithm::Gpa1, StartPoint::Random(seed), solver.clone());
            let (problem, trace) = ctx.run(&format!("gpa1-{}-{seed}", slug(id)), &cfg)?;
            let c = trace.constant("C").ok_or("missing C")?;
            let points = visited(&trace);
            let values: Vec<f64> = points.iter().map(|x| problem.objective.value(x)).collect();
            for k in 1..points.len() {
                let excess = values[k] + 0.5 * c * (&points[k] - &points[k - 1]).norm_squared() - values[k - 1];
                worst = worst.max(excess);
                steps += 1;
            }
        }
    }
    Ok(Outcome {
        passed: worst <= ctx.tol.lyapunov_slack,
        measured: format!("max f(x+) + C/2|dx|^2 - f(x) = {worst:.3e} over {steps} steps, 15 runs"),
        expected: format!("<= {:.0e}", ctx.tol.lyapunov_slack),
    })
}

fn slug(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn stationary_steps(ctx: &Context) -> Result<Outcome, String> {
    let mut passed = true;
    let mut worst_residual_ratio = 0.0f64;
    let mut worst_step_ratio = 0.0f64;
    for id in ["quad-diag:1,2,10", "approx-linear:eps=0.1", "linear:0,0,1"] {
        let problem = problems::lookup(id).map_err(|e| e.to_string())?;
        for eps in [1e-2, 1e-3] {
            let solver = SolverConfig {
                eps,
                seed: ctx.seed,
                ..SolverConfig::default()
            };
            let out = stationary_point_solve(&problem.surface, problem.objective.as_ref(), &solver, &problem.default_x0)
                .map_err(|e| format!("{id}: {e}"))?;
            if !matches!(out.trace.termination, Termination::Converged) {
                return Err(format!("{id}, eps = {eps}: {:?}", out.trace.termination));
            }
            let g = problem.objective.gradient(&out.point);
            let residual = problem.surface.tangent_project(&out.point, &g).map_err(|e| e.to_string())?.norm();
            worst_residual_ratio = worst_residual_ratio.max(residual / eps);
            worst_step_ratio = worst_step_ratio.max(out.steps as f64 / out.step_bound);
            passed &= residual <= eps && out.steps as f64 <= out.step_bound;
            if let Some(dir) = ctx.trace_dir {
                let cfg = config(id, Algorithm::Stationary, StartPoint::RegistryDefault, solver);
                save_trace(dir, &format!("stationary-{}-{eps:e}", slug(id)), &cfg, &problem, &out.trace)?;
            }
        }
    }
    Ok(Outcome {
        passed,
        measured: format!(
            "max residual/eps = {worst_residual_ratio:.3e}, max steps/N = {worst_step_ratio:.3e}"
        ),
        expected: "both <= 1".into(),
    })
}

fn quadratic_of(problem: &ExampleProblem) -> Result<&surfmin::objectives::QuadraticForm, String> {
    problem.quadratic.as_deref().ok_or_else(|| format!("{} is not quadratic", problem.id))
}

fn sphere_step_bound(ctx: &Context) -> Result<Outcome, String> {
    let cfg = config("quad-diag:1,2,10", Algorithm::SphereGpa, StartPoint::RegistryDefault, SolverConfig::default());
    let (problem, trace) = ctx.run("sphere-step-bound", &cfg)?;
    let form = quadratic_of(&problem)?;
    let values = &form.spectrum().values;
    let tau = form.spectrum().vector(0).dot(&trace.records[0].x).abs();
    let mu = theory::quadratic_lpl_mu(tau, values[0], values[1]);
    let l1 = trace.constant("L1").ok_or("missing L1")?;
    let points = visited(&trace);
    let phi: Vec<f64> = points.iter().map(|x| form.rayleigh_gap(x)).collect();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for k in 0..points.len() - 1 {
        if phi[k] == 0.0 {
            break;
        }
        let factor = theory::sphere_step_factor(mu, l1, &points[k], &form.gradient(&points[k]));
        worst = worst.max(phi[k + 1] / (factor * phi[k]));
        checked += 1;
    }
    Ok(Outcome {
        passed: checked > 0 && worst <= 1.0 + ctx.tol.sphere_step_slack,
        measured: format!("tau = {tau}, mu = {mu}, max phi+/(factor phi) = {worst:.6} over {checked} steps"),
        expected: format!("<= 1 + {:.0e}", ctx.tol.sphere_step_slack),
    })
}

fn eigmin_rate(ctx: &Context) -> Result<Outcome, String> {
    let cfg = config("quad-diag:1,2,10", Algorithm::Eigmin, StartPoint::RegistryDefault, SolverConfig::default());
    let (problem, trace) = ctx.run("eigmin-rate", &cfg)?;
    let form = quadratic_of(&problem)?;
    let v = &form.spectrum().values;
    let (l1, l2, ln) = (v[0], v[1], v[v.len() - 1]);
    let tau = form.spectrum().vector(0).dot(&trace.records[0].x).abs();
    let q = theory::eigen_global_rate(tau, l1, l2, ln);
    let q1 = theory::eigen_asymptotic_rate(l1, l2, ln);
    let header_ok = [("q", q), ("q1", q1), ("mu", theory::quadratic_lpl_mu(tau, l1, l2))]
        .iter()
        .all(|(name, value)| trace.constant(name).is_some_and(|c| ((c - value) / value).abs() <= 1e-12));
    let phi: Vec<f64> = visited(&trace).iter().map(|x| form.rayleigh_gap(x)).collect();
    let fit = fit_linear_rate(&phi, 0.5).map_err(|e| e.to_string())?;
    let envelope = check_geometric_envelope(&phi, q, 1e-12, 0.0);
    Ok(Outcome {
        passed: header_ok && fit.fitted_q <= ctx.tol.eigmin_tail_rate_bound && envelope.passed,
        measured: format!(
            "fitted tail q = {:.6}, max phi_k/(q^k phi_0) = {:.6}, header constants {}",
            fit.fitted_q,
            envelope.worst_ratio,
            if header_ok { "match" } else { "differ" }
        ),
        expected: format!("fitted q <= {:.6} (q1 = {q1:.6}), envelope ratio <= 1, q = {q:.6}", ctx.tol.eigmin_tail_rate_bound),
    })
}

fn lpl_cap(ctx: &Context) -> Result<Outcome, String> {
    let problem = problems::lookup("quad-diag:1,2,10").map_err(|e| e.to_string())?;
    let form = quadratic_of(&problem)?;
    let e1 = form.spectrum().vector(0);
    let (l1, l2) = (form.spectrum().values[0], form.spectrum().values[1]);
    let tau = 0.5;
    let mu = theory::quadratic_lpl_mu(tau, l1, l2);
    let wanted = 10_000;
    let mut accepted = 0;
    let mut worst = f64::INFINITY;
    for x in QuasiSphere::new(3, ctx.seed).take(100 * wanted) {
        if accepted == wanted {
            break;
        }
        if x.dot(&e1) < tau {
            continue;
        }
        accepted += 1;
        let g = form.gradient(&x);
        let pg2 = (&g - &x * x.dot(&g)).norm_squared();
        worst = worst.min(pg2 - mu * (form.value(&x) - l1));
    }
    let in_cap = |x: &Vector| x.dot(&e1) >= tau;
    let est = lpl_mu_estimate(&problem.surface, form, l1, &LplSampling::new(2.0, wanted, ctx.seed).within(&in_cap))
        .map_err(|e| e.to_string())?;
    Ok(Outcome {
        passed: accepted == wanted && worst >= -ctx.tol.lpl_cap_slack && est.mu_hat >= mu - ctx.tol.lpl_cap_slack,
        measured: format!("{accepted} samples, min |P f'|^2 - mu (f - f0) = {worst:.3e}, mu_hat = {:.6}", est.mu_hat),
        expected: format!("10000 samples, >= -{:.0e}, mu = {mu}", ctx.tol.lpl_cap_slack),
    })
}

fn lpl_exponents(ctx: &Context) -> Result<Outcome, String> {
    let mut estimates = Vec::new();
    for p in [0.5, 1.0] {
        let problem = problems::lpl2d(p).map_err(|e| e.to_string())?;
        let path = circle_path(&dvector![0.0, 0.5], 0.5, 0.1, 0.85, 30);
        let f0 = problem.min_value.unwrap_or(0.0);
        let est = lpl_exponent_estimate(&problem.surface, problem.objective.as_ref(), f0, &path).map_err(|e| e.to_string())?;
        estimates.push(est.alpha_hat);
    }
    let within = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
    let (a2, a43) = (ctx.tol.exponent_alpha2, ctx.tol.exponent_alpha43);
    Ok(Outcome {
        passed: within(estimates[0], a2) && within(estimates[1], a43),
        measured: format!("alpha(p=0.5) = {:.4}, alpha(p=1) = {:.4}", estimates[0], estimates[1]),
        expected: format!("[{}, {}] and [{}, {}]", a2.0, a2.1, a43.0, a43.1),
    })
}

fn gpa2_decrease(ctx: &Context) -> Result<Outcome, String> {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_membership = 0.0f64;
    let mut constants_ok = true;
    let mut steps = 0;
    for id in ["lpl2d:p=0.5", "scf"] {
        let cfg = config(id, Algorithm::Gpa2, StartPoint::RegistryDefault, SolverConfig::default());
        let (problem, trace) = ctx.run(&format!("gpa2-{}", slug(id)), &cfg)?;
        let constant = |name: &str| trace.constant(name).ok_or(format!("missing {name}"));
        let (t, l1, l, r, q_t) = (constant("t")?, constant("L1")?, constant("L")?, constant("R")?, constant("q_t")?);
        let q = theory::tangent_decrease_factor(t, l1, l, r);
        constants_ok &= ((q - q_t) / q).abs() <= 1e-12 && t == constant("t0")?;
        let points = visited(&trace);
        for (k, x) in points.iter().enumerate() {
            worst_membership = worst_membership.max(problem.surface.membership_residual(x));
            if k + 1 < points.len() {
                let f = problem.objective.value(x);
                let next = problem.objective.value(&points[k + 1]);
                let pg = trace.records[k].proj_grad_norm;
                let shortfall = pg * pg * q - (f - next) - ctx.tol.gpa2_decrease_slack * (1.0 + f.abs());
                worst = worst.max(shortfall);
                steps += 1;
            }
        }
    }
    Ok(Outcome {
        passed: constants_ok && worst <= 0.0 && worst_membership <= ctx.tol.membership,
        measured: format!(
            "max shortfall of decrease vs |P f'|^2 q(t0) = {worst:.3e} over {steps} steps, max membership residual = {worst_membership:.3e}"
        ),
        expected: format!("shortfall <= 0 (slack {:.0e}(1+|f|)), residual <= {:.0e}", ctx.tol.gpa2_decrease_slack, ctx.tol.membership),
    })
}

fn gpa3_superlinear(ctx: &Context) -> Result<Outcome, String> {
    let start = dvector![1.0, 0.1, 0.1].normalize();
    let cfg = config(
        "quad-diag:1,2,3",
        Algorithm::Gpa3,
        StartPoint::Explicit(start.iter().copied().collect()),
        SolverConfig::default(),
    );
    let (_, trace) = ctx.run("gpa3-superlinear", &cfg)?;
    let phases: Vec<Phase> = trace.records.iter().filter_map(|r| r.phase).collect();
    let switches = phases.windows(2).filter(|w| w[0] != w[1]).count();
    let single_switch = switches == 1 && phases.first() == Some(&Phase::Gradient) && phases.last() == Some(&Phase::Newton);
    let kkt: Vec<f64> = trace.records.iter().filter_map(|r| r.kkt_residual).collect();
    let power = ctx.tol.superlinear_power;
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    let mut passed = single_switch;
    for w in kkt.windows(2).filter(|w| w[0] <= KKT_ENTRY && w[0] > KKT_FLOOR) {
        // for F < 1, F+ <= F^p  ⇔  log F+ / log F >= p
        worst = worst.min(w[1].ln() / w[0].ln());
        passed &= w[1] <= w[0].powf(power);
        checked += 1;
    }
    Ok(Outcome {
        passed: passed && checked > 0,
        measured: format!(
            "{switches} phase switch(es), min log F+/log F = {worst:.3} over {checked} tail pairs, final |F| = {:.3e}",
            kkt.last().copied().unwrap_or(f64::NAN)
        ),
        expected: format!("1 switch, |F+| <= |F|^{power} for 1e-12 < |F| <= 1e-2"),
    })
}

fn ffw_approx_linear(ctx: &Context) -> Result<Outcome, String> {
    let id = "approx-linear:eps=0.1";
    let reference = SolverConfig {
        max_iter: 1000,
        tol_x: 0.0,
        pg_tol: 0.0,
        ..SolverConfig::default()
    };
    let (problem, ref_trace) = ctx.run("ffw-approx-linear-reference", &config(id, Algorithm::Ffw, StartPoint::RegistryDefault, reference))?;
    let x_star = ref_trace.final_x.clone();
    let (_, trace) = ctx.run("ffw-approx-linear", &config(id, Algorithm::Ffw, StartPoint::RegistryDefault, SolverConfig::default()))?;
    let obj = problem.objective.as_ref();
    let l1 = obj.grad_lipschitz();
    let grad0 = obj.gradient(&Vector::zeros(problem.surface.dim())).norm();
    let q = theory::approx_linear_rate(l1, grad0);
    let dist: Vec<f64> = visited(&trace).iter().map(|x| (x - &x_star).norm()).collect();
    let check = check_geometric_envelope(&dist, q, ctx.tol.approx_linear_slack, DISTANCE_FLOOR);
    Ok(Outcome {
        passed: grad0 > 2.0 * l1 && check.passed && check.checked > 1,
        measured: format!(
            "|f'(0)| = {grad0}, max |x_k - x*|/(q^k |x_0 - x*|) = {:.4} over {} iterates",
            check.worst_ratio, check.checked
        ),
        expected: format!("<= 1 + {} with q = {q:.6}", ctx.tol.approx_linear_slack),
    })
}

fn ffw_contraction(ctx: &Context) -> Result<Outcome, String> {
    let cfg = config("dominant-ball", Algorithm::Ffw, StartPoint::RegistryDefault, SolverConfig::default());
    let (problem, trace) = ctx.run("ffw-contraction", &cfg)?;
    let points = visited(&trace);
    let m_hat = dominance_estimate(&points, problem.objective.as_ref(), problem.surface.reach());
    if m_hat < ctx.tol.min_dominance {
        return Ok(Outcome {
            passed: false,
            measured: format!("certified m = {m_hat:.4}"),
            expected: format!("m >= {}", ctx.tol.min_dominance),
        });
    }
    let steps = trace.step_norms();
    let check = check_rate_bound_above(&steps, 1.0 / m_hat, ctx.tol.contraction_slack, STEP_FLOOR);
    Ok(Outcome {
        passed: check.passed && check.checked > 0,
        measured: format!(
            "m = {m_hat:.4}, max step ratio = {:.6} over {} pairs",
            check.worst_ratio, check.checked
        ),
        expected: format!("<= 1/m = {:.6} (1 + {:.0e})", 1.0 / m_hat, ctx.tol.contraction_slack),
    })
}

fn minstat(ctx: &Context) -> Result<Outcome, String> {
    let r = 2.0;
    let solver = SolverConfig {
        max_iter: 1,
        ..SolverConfig::default()
    };
    let (problem, trace) = ctx.run("minstat", &config("minstat:r=2", Algorithm::Ffw, StartPoint::RegistryDefault, solver))?;
    let x0 = &trace.records[0].x;
    let x1 = &trace.final_x;
    let obj = problem.objective.as_ref();
    let landing = x1.norm();
    let stationarity = stationarity_distance(&problem.surface, obj, x1).map_err(|e| e.to_string())?;
    let minimizer = dvector![-(r * r - 1.0f64).sqrt(), 1.0 - r];
    let min_gap = (obj.value(&minimizer) + (r - 1.0) * (r - 1.0) / 2.0).abs();
    let on_surface = problem.surface.membership_residual(&minimizer);
    let tol = ctx.tol.minstat_tol;
    Ok(Outcome {
        passed: x0[0] > 0.0
            && x0[1] > -1.0
            && x0[1] < 0.0
            && landing <= tol
            && stationarity <= tol
            && min_gap <= tol
            && on_surface <= tol
            && obj.value(x1) > obj.value(&minimizer),
        measured: format!(
            "|x1| = {landing:.1e}, stationarity = {stationarity:.1e}, f(x1) = {}, |f(x*) + (r-1)^2/2| = {min_gap:.1e}",
            obj.value(x1)
        ),
        expected: format!("all <= {tol:.0e}, f(x1) > f(x*) = -0.5"),
    })
}

fn e2_failure(ctx: &Context) -> Result<Outcome, String> {
    let problem = problems::e2();
    let one_step = SolverConfig {
        max_iter: 1,
        ..SolverConfig::default()
    };
    let starts: Vec<f64> = (0..9).map(|i| 0.1 * 10f64.powf(-0.25 * i as f64)).collect();
    let mut moves = Vec::new();
    for (i, &a) in starts.iter().enumerate() {
        // point of the circle x² + (y − ½)² = ¼ above abscissa a
        let y = a * a / (0.5 + (0.25 - a * a).sqrt());
        let cfg = config("e2", Algorithm::Ffw, StartPoint::Explicit(vec![a, y]), one_step.clone());
        let (_, trace) = ctx.run(&format!("e2-step-{i}"), &cfg)?;
        moves.push((a - trace.final_x[0]).abs());
    }
    let exponent = log_log_slope(&starts, &moves);
    let long = SolverConfig {
        max_iter: 1000,
        ..SolverConfig::default()
    };
    let (_, trace) = ctx.run("e2-long", &config("e2", Algorithm::Ffw, StartPoint::RegistryDefault, long))?;
    let minimizer = problem.minimizer.clone().ok_or("e2 has no registered minimizer")?;
    let dist: Vec<f64> = visited(&trace).iter().map(|x| (x - &minimizer).norm()).collect();
    let rate = fit_linear_rate(&dist, 0.5).map_err(|e| e.to_string())?.fitted_q;
    let (lo, hi) = ctx.tol.cubic_exponent;
    Ok(Outcome {
        passed: exponent >= lo && exponent <= hi && rate > ctx.tol.e2_min_rate && trace.termination == Termination::MaxIter,
        measured: format!("|x0 - x1| ~ x0^{exponent:.4}, tail rate = {rate:.6}, termination {:?}", trace.termination),
        expected: format!("exponent in [{lo}, {hi}], rate > {}, max-iter", ctx.tol.e2_min_rate),
    })
}

fn theta_threshold(ctx: &Context) -> Result<Outcome, String> {
    let exact = chord_of_arcsin(1.0) == std::f64::consts::SQRT_2;
    let mut worst_residual = 0.0f64;
    for m in [1.05, 1.2, 1.4] {
        let theta = dominance_threshold(m).map_err(|e| e.to_string())?;
        worst_residual = worst_residual.max((chord_of_arcsin(theta) / theta - m).abs());
    }
    let mut worst_rate = 0.0f64;
    for m in [1.05, 1.2, 1.4, 2.0] {
        let max = dominance_threshold(m).map_err(|e| e.to_string())?;
        for i in 1..=100 {
            let theta = max * i as f64 / 101.0;
            worst_rate = worst_rate.max(ffw_local_rate(m, theta).map_err(|e| e.to_string())?);
        }
    }
    Ok(Outcome {
        passed: exact && worst_residual <= ctx.tol.threshold_residual && worst_rate < 1.0,
        measured: format!(
            "h(1) {} sqrt 2, max |h(theta_m)/theta_m - m| = {worst_residual:.1e}, max rate on grid = {worst_rate:.6}",
            if exact { "==" } else { "!=" }
        ),
        expected: format!("h(1) == sqrt 2, residual <= {:.0e}, rate < 1", ctx.tol.threshold_residual),
    })
}

fn derivatives(ctx: &Context) -> Result<Outcome, String> {
    let mut worst_fd = 0.0f64;
    let mut worst_gap = f64::NEG_INFINITY;
    for id in REGISTERED_IDS {
        let problem = problems::lookup(id).map_err(|e| e.to_string())?;
        let obj = problem.objective.as_ref();
        let points = problem.surface.quasi_random_points(100, ctx.seed).map_err(|e| e.to_string())?;
        for x in &points {
            worst_fd = worst_fd.max(fd_gradient_check(obj, x, 1e-6));
        }
        let xs = problem.surface.quasi_random_points(1000, ctx.seed + 1).map_err(|e| e.to_string())?;
        let ys = problem.surface.quasi_random_points(1000, ctx.seed + 2).map_err(|e| e.to_string())?;
        let l1 = obj.grad_lipschitz();
        for (x, y) in xs.iter().zip(&ys) {
            let scale = 1.0 + obj.value(x).abs() + obj.value(y).abs();
            worst_gap = worst_gap.max(descent_gap(obj, x, y, l1) / scale);
        }
    }
    Ok(Outcome {
        passed: worst_fd <= ctx.tol.fd_gradient && worst_gap <= 1e-12,
        measured: format!("max fd error = {worst_fd:.2e}, max upper-bound excess = {worst_gap:.2e}"),
        expected: format!("fd <= {:.0e}, excess <= 1e-12 (1 + |f(x)| + |f(y)|)", ctx.tol.fd_gradient),
    })
}

/// One configuration per method; each is run twice and both trace formats
/// are compared byte for byte.
fn determinism(ctx: &Context) -> Result<Outcome, String> {
    let cases = [
        ("quad-diag:1,2,10", Algorithm::Gpa1, StartPoint::Random(ctx.seed)),
        ("quad-diag:1,2,10", Algorithm::Stationary, StartPoint::Random(ctx.seed)),
        ("quad-diag:1,2,10", Algorithm::SphereGpa, StartPoint::Random(ctx.seed)),
        ("scf", Algorithm::Gpa2, StartPoint::RegistryDefault),
        ("quad-diag:1,2,3", Algorithm::Gpa3, StartPoint::Random(ctx.seed)),
        ("dominant-ball", Algorithm::Ffw, StartPoint::Random(ctx.seed)),
        ("quad-diag:1,2,10", Algorithm::Eigmin, StartPoint::Random(ctx.seed)),
    ];
    let dirs = [tempfile::tempdir(), tempfile::tempdir()]
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut compared = 0;
    let mut differing = Vec::new();
    for (problem, algorithm, x0) in cases {
        let mut solver = SolverConfig {
            seed: ctx.seed,
            ..SolverConfig::default()
        };
        if algorithm == Algorithm::Stationary {
            solver.eps = 1e-3;
        }
        let cfg = config(problem, algorithm, x0, solver);
        let name = format!("{}-{}", slug(problem), algorithm.id());
        for dir in &dirs {
            let (p, run) = execute(&cfg).map_err(|e| e.to_string())?;
            let trace = run.map_err(|e| e.to_string())?;
            save_trace(dir.path(), &name, &cfg, &p, &trace)?;
        }
        for ext in ["jsonl", "csv"] {
            let file = format!("{name}.{ext}");
            let a = std::fs::read(dirs[0].path().join(&file)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dirs[1].path().join(&file)).map_err(|e| e.to_string())?;
            compared += 1;
            if a != b {
                differing.push(file);
            }
        }
    }
    Ok(Outcome {
        passed: differing.is_empty(),
        measured: if differing.is_empty() {
            format!("{compared} trace files identical")
        } else {
            format!("differing: {}", differing.join(", "))
        },
        expected: "byte-identical traces across two runs".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_by_id_or_number() {
        assert!(selected(&[], 4, "eigmin-rate"));
        assert!(selected(&["eigmin-rate".into()], 4, "eigmin-rate"));
        assert!(selected(&["4".into()], 4, "eigmin-rate"));
        assert!(!selected(&["minstat".into()], 4, "eigmin-rate"));
    }

    #[test]
    fn filtered_suite_runs_only_the_named_criterion() {
        let options = SuiteOptions {
            filter: vec!["theta-threshold".into()],
            ..SuiteOptions::default()
        };
        let report = acceptance_suite(&options);
        assert_eq!(report.results.len(), 1);
        assert!(report.all_passed(), "{}", report.results[0]);
    }

    #[test]
    fn default_eigmin_bound_is_q1_plus_margin() {
        assert!((Tolerances::default().eigmin_tail_rate_bound - (8.0 / 9.0 + 0.02)).abs() < 1e-15);
    }
}
