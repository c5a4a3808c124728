//! `tmap`: run one solve and write its trace.
//!
//! Exit codes: 0 converged, 1 iteration limit, 2 invalid arguments,
//! 3 I/O or data error, 4 linesearch failure, 5 numeric error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tmap_core::problems::SyntheticLassoParams;
use tmap_core::run::{error_exit_code, run, ProblemSpec, RunSpec, SolverKind, DATA_DIR_ENV};
use tmap_core::SolverConfig;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Problem {
    Logistic,
    Lasso,
    SyntheticLasso,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Solver {
    Tmap,
    TmapSafe,
    ProxGrad,
}

impl From<Solver> for SolverKind {
    fn from(s: Solver) -> Self {
        match s {
            Solver::Tmap => SolverKind::Tmap,
            Solver::TmapSafe => SolverKind::TmapSafe,
            Solver::ProxGrad => SolverKind::ProxGrad,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tmap",
    version,
    about = "Solve min f(x) + gamma ||x||_1 with TMAP and write a per-iteration trace",
    after_help = format!("Relative --data paths are resolved against ${DATA_DIR_ENV} when it is set.")
)]
struct Args {
    #[arg(long, value_enum, default_value = "synthetic-lasso")]
    problem: Problem,
    /// LIBSVM file (logistic and lasso problems).
    #[arg(long, required_if_eq_any = [("problem", "logistic"), ("problem", "lasso")])]
    data: Option<PathBuf>,
    /// Number of features; defaults to the largest index in the file.
    #[arg(long)]
    features: Option<usize>,
    #[arg(long, value_enum, default_value = "tmap")]
    solver: Solver,

    /// l1 weight; defaults to 1/m for logistic and 0.01 for lasso.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = SolverConfig::default().eps_accuracy)]
    eps: f64,
    #[arg(long, default_value_t = SolverConfig::default().sigma)]
    sigma: f64,
    #[arg(long, default_value_t = SolverConfig::default().beta)]
    beta: f64,
    #[arg(long, default_value_t = SolverConfig::default().tau)]
    tau: f64,
    #[arg(long, default_value_t = SolverConfig::default().c)]
    c: f64,
    #[arg(long, default_value_t = SolverConfig::default().delta)]
    delta: f64,
    #[arg(long, default_value_t = SolverConfig::default().eta)]
    eta: f64,
    #[arg(long, default_value_t = SolverConfig::default().tau_th)]
    tau_th: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_outer)]
    max_iters: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_cg)]
    max_cg: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_backtracks)]
    max_backtracks: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 256)]
    m: usize,
    #[arg(long, default_value_t = 25)]
    k: usize,
    /// Dynamic range of the planted signal in dB.
    #[arg(long, default_value_t = 20.0)]
    dynamic_range: f64,
    /// Standard deviation of the measurement noise.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Write the generated instance to this sidecar file.
    #[arg(long)]
    instance_out: Option<PathBuf>,

    /// Trace CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-solve at tol/100 and estimate the convergence order.
    #[arg(long)]
    estimate_rate: bool,
}

impl Args {
    fn spec(&self) -> RunSpec {
        let problem = match self.problem {
            Problem::Logistic => ProblemSpec::Logistic {
                data: self.data.clone().unwrap_or_default(),
                n_features: self.features,
            },
            Problem::Lasso => ProblemSpec::Lasso {
                data: self.data.clone().unwrap_or_default(),
                n_features: self.features,
            },
            Problem::SyntheticLasso => ProblemSpec::SyntheticLasso(SyntheticLassoParams {
                n: self.n,
                m: self.m,
                k: self.k,
                dynamic_range_db: self.dynamic_range,
                noise_sigma: self.noise,
                seed: self.seed,
            }),
        };
        let config = SolverConfig {
            gamma: self.gamma.unwrap_or(1.0),
            eps_accuracy: self.eps,
            sigma: self.sigma,
            beta: self.beta,
            tau: self.tau,
            c: self.c,
            delta: self.delta,
            eta: self.eta,
            tau_th: self.tau_th,
            tol: self.tol,
            max_outer: self.max_iters,
            max_backtracks: self.max_backtracks,
            max_cg: self.max_cg,
            record_iterates: false,
        };
        RunSpec {
            problem,
            solver: self.solver.into(),
            config,
            gamma: self.gamma,
            out: self.out.clone(),
            instance_out: self.instance_out.clone(),
            estimate_rate: self.estimate_rate,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args.spec()) {
        Ok(outcome) => {
            for (key, value) in &outcome.summary {
                println!("{key}: {value}");
            }
            if let Some(Err(e)) = &outcome.rate {
                println!("rate_order: unavailable ({e})");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
