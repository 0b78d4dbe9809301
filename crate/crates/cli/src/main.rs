use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surfmin::analysis::{lpl_mu_estimate, LplSampling};
use surfmin::objectives::problems;
use surfmin::solvers::Algorithm;
use surfmin_cli::config::{parse_config, RunConfig, StartPoint, TraceFormat};
use surfmin_cli::run::{run_command, EXIT_ERROR};
use surfmin_cli::suite::{acceptance_suite, SuiteOptions};

#[derive(Parser)]
#[command(name = "surfmin", version, about = "Gradient-type methods on spheres, level-set surfaces and ball boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the acceptance criteria.
    Suite {
        /// Comma-separated criterion ids or numbers.
        #[arg(long, value_delimiter = ',')]
        filter: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write every run's trace (JSON lines and CSV) here.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Minimal eigenvalue of the symmetric matrix in FILE.
    Eigmin {
        #[arg(long)]
        matrix: PathBuf,
        /// registry-default, random:<seed> or a comma-separated vector.
        #[arg(long, default_value = "registry-default")]
        x0: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "jsonl")]
        format: String,
    },
    /// Estimate the LPL constant of a registered problem.
    EstimateLpl {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Level cap: only points with f <= beta are sampled.
        #[arg(long)]
        beta: Option<f64>,
    },
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return exit(EXIT_ERROR);
                }
            };
            match parse_config(&text) {
                Ok(c) => exit(run_command(&c)),
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    exit(EXIT_ERROR)
                }
            }
        }
        Command::Suite { filter, seed, trace_dir } => {
            if let Some(dir) = &trace_dir {
                if let Err(e) = std::fs::create_dir_all(dir) {
                    eprintln!("error: {}: {e}", dir.display());
                    return exit(EXIT_ERROR);
                }
            }
            let report = acceptance_suite(&SuiteOptions {
                filter,
                seed,
                trace_dir,
                ..SuiteOptions::default()
            });
            for result in &report.results {
                println!("{result}");
            }
            let passed = report.results.iter().filter(|r| r.passed).count();
            println!("{passed}/{} criteria passed", report.results.len());
            exit(report.exit_code())
        }
        Command::Eigmin { matrix, x0, output, format } => {
            let mut config = RunConfig::new(matrix.display().to_string(), Algorithm::Eigmin);
            let parsed = x0.parse::<StartPoint>().and_then(|x0| Ok((x0, format.parse::<TraceFormat>()?)));
            match parsed {
                Ok((x0, format)) => {
                    config.x0 = x0;
                    config.format = format;
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(EXIT_ERROR);
                }
            }
            config.output = output;
            exit(run_command(&config))
        }
        Command::EstimateLpl {
            problem,
            alpha,
            samples,
            seed,
            beta,
        } => {
            let p = match problems::lookup(&problem) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(EXIT_ERROR);
                }
            };
            let Some(f0) = p.min_value else {
                eprintln!("error: {problem} has no registered minimum value");
                return exit(EXIT_ERROR);
            };
            let mut plan = LplSampling::new(alpha, samples, seed);
            if let Some(beta) = beta.or(p.level_cap) {
                plan = plan.with_beta(beta);
            }
            match lpl_mu_estimate(&p.surface, p.objective.as_ref(), f0, &plan) {
                Ok(est) => {
                    let worst: Vec<String> = est.worst_point.iter().map(|v| format!("{v:.6}")).collect();
                    println!(
                        "mu_hat = {:.6e}, alpha = {}, samples = {}, beta = {}, worst point = ({})",
                        est.mu_hat,
                        est.alpha,
                        est.n_samples,
                        est.beta,
                        worst.join(", ")
                    );
                    exit(0)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit(EXIT_ERROR)
                }
            }
        }
    }
}
