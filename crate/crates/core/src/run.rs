//! One solve per [`RunSpec`]: load or generate a problem, run a solver, write
//! the trace.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::{error_sequence, estimate_rate_from_errors, RateEstimate};
use crate::error::{Result, TmapError};
use crate::libsvm::{read_libsvm, LabelMode};
use crate::problems::{
    generate_lasso_instance, write_instance, LassoProblem, LogisticProblem, ProblemOracle,
    SparseRowMatrix, SyntheticLassoParams,
};
use crate::safeguard::{solve_prox_grad, solve_safeguarded};
use crate::solver::{solve, SolveReport, SolveStatus, SolverConfig};
use crate::trace::{write_trace, TraceSummary};
use crate::vector::DenseVector;

/// Relative data paths are looked up under this directory when set.
pub const DATA_DIR_ENV: &str = "TMAP_DATA_DIR";

/// Default l1 weight for least-squares problems.
pub const LASSO_DEFAULT_GAMMA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// Binary-labelled LIBSVM file.
    Logistic {
        data: PathBuf,
        n_features: Option<usize>,
    },
    /// LIBSVM file with real targets, `f(x) = 0.5 ||Ax - b||^2`.
    Lasso {
        data: PathBuf,
        n_features: Option<usize>,
    },
    SyntheticLasso(SyntheticLassoParams),
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Logistic { .. } => "logistic",
            ProblemSpec::Lasso { .. } => "lasso",
            ProblemSpec::SyntheticLasso(_) => "synthetic_lasso",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Tmap,
    TmapSafe,
    ProxGrad,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Tmap => "tmap",
            SolverKind::TmapSafe => "tmap-safe",
            SolverKind::ProxGrad => "prox-grad",
        }
    }
}

impl FromStr for SolverKind {
    type Err = TmapError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tmap" => Ok(SolverKind::Tmap),
            "tmap-safe" | "tmap_safe" => Ok(SolverKind::TmapSafe),
            "prox-grad" | "prox_grad" => Ok(SolverKind::ProxGrad),
            _ => Err(TmapError::Parameter(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: ProblemSpec,
    pub solver: SolverKind,
    /// `config.gamma` is ignored when `gamma` is `None`; the problem default
    /// is used instead (`1/m` for logistic, [`LASSO_DEFAULT_GAMMA`] otherwise).
    pub config: SolverConfig,
    pub gamma: Option<f64>,
    /// Trace CSV destination.
    pub out: Option<PathBuf>,
    /// Sidecar for the generated instance (synthetic problems only).
    pub instance_out: Option<PathBuf>,
    /// Re-solve at a 100x tighter tolerance and estimate the convergence order.
    pub estimate_rate: bool,
}

impl RunSpec {
    pub fn new(problem: ProblemSpec, solver: SolverKind) -> Self {
        Self {
            problem,
            solver,
            config: SolverConfig::default(),
            gamma: None,
            out: None,
            instance_out: None,
            estimate_rate: false,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: SolveReport,
    pub gamma: f64,
    pub rate: Option<Result<RateEstimate>>,
    pub summary: TraceSummary,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        status_exit_code(self.report.status)
    }
}

pub fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::MaxIters => 1,
        SolveStatus::LinesearchFailure => 4,
        SolveStatus::NumericError => 5,
    }
}

pub fn error_exit_code(err: &TmapError) -> i32 {
    match err {
        TmapError::Parameter(_) | TmapError::Dimension { .. } | TmapError::Capability(_) => 2,
        TmapError::Io(_) | TmapError::Csv(_) | TmapError::Parse { .. } | TmapError::Data(_) => 3,
        TmapError::LinesearchFailure(_) => 4,
        TmapError::Numeric(_) => 5,
        TmapError::InsufficientData(_) => 6,
    }
}

/// Joins relative paths onto `$TMAP_DATA_DIR` when it is set.
pub fn resolve_data_path(path: &Path) -> PathBuf {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn load_libsvm(
    path: &Path,
    mode: LabelMode,
    n: Option<usize>,
) -> Result<(SparseRowMatrix, Vec<f64>)> {
    let path = resolve_data_path(path);
    let file = File::open(&path).map_err(|e| {
        TmapError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    read_libsvm(BufReader::new(file), mode, n)
}

fn solve_with(
    oracle: &dyn ProblemOracle,
    solver: SolverKind,
    config: &SolverConfig,
) -> Result<SolveReport> {
    let x0 = DenseVector::zeros(oracle.dim());
    match solver {
        SolverKind::Tmap => solve(oracle, &x0, config),
        SolverKind::TmapSafe => solve_safeguarded(oracle, &x0, config),
        SolverKind::ProxGrad => solve_prox_grad(oracle, &x0, config),
    }
}

/// Order estimate from the last four nonzero errors. Iterates that coincide
/// with `x_star` exactly carry no rate information and are dropped.
pub fn trailing_rate(iterates: &[Vec<f64>], x_star: &[f64]) -> Result<RateEstimate> {
    let errors: Vec<f64> = error_sequence(iterates, x_star)
        .into_iter()
        .filter(|e| *e > 0.0)
        .collect();
    estimate_rate_from_errors(&errors[errors.len().saturating_sub(4)..])
}

pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    let (oracle, default_gamma): (Box<dyn ProblemOracle>, f64) = match &spec.problem {
        ProblemSpec::Logistic { data, n_features } => {
            let (a, labels) = load_libsvm(data, LabelMode::Binary, *n_features)?;
            let p = LogisticProblem::new(a, labels)?;
            let gamma = 1.0 / p.samples() as f64;
            (Box::new(p), gamma)
        }
        ProblemSpec::Lasso { data, n_features } => {
            let (a, b) = load_libsvm(data, LabelMode::Real, *n_features)?;
            (Box::new(LassoProblem::new(a, b)?), LASSO_DEFAULT_GAMMA)
        }
        ProblemSpec::SyntheticLasso(params) => {
            let inst = generate_lasso_instance(params)?;
            if let Some(path) = &spec.instance_out {
                write_instance(&inst, BufWriter::new(File::create(path)?))?;
            }
            (
                Box::new(LassoProblem::new(inst.operator, inst.b)?),
                LASSO_DEFAULT_GAMMA,
            )
        }
    };
    let gamma = spec.gamma.unwrap_or(default_gamma);
    let mut config = SolverConfig {
        gamma,
        ..spec.config
    };
    config.record_iterates |= spec.estimate_rate;
    config.validate()?;

    let report = solve_with(oracle.as_ref(), spec.solver, &config)?;

    let rate = if spec.estimate_rate {
        let tight = SolverConfig {
            tol: config.tol / 100.0,
            record_iterates: false,
            ..config
        };
        Some(
            solve_with(oracle.as_ref(), spec.solver, &tight)
                .and_then(|reference| trailing_rate(&report.iterates, &reference.x_final)),
        )
    } else {
        None
    };

    let mut summary: TraceSummary = vec![
        ("problem".into(), spec.problem.name().into()),
        ("solver".into(), spec.solver.as_str().into()),
        ("gamma".into(), format!("{gamma:?}")),
        ("status".into(), report.status.as_str().into()),
        ("iterations".into(), report.iterations().to_string()),
        (
            "final_residual".into(),
            format!("{:e}", report.final_residual()),
        ),
        ("final_psi".into(), format!("{:?}", report.final_psi())),
        (
            "identification_iter".into(),
            report
                .identification_iter
                .map_or_else(|| "none".into(), |k| k.to_string()),
        ),
        (
            "wall_time_s".into(),
            format!("{:.6}", report.elapsed.as_secs_f64()),
        ),
    ];
    if let Some(sg) = &report.safeguard {
        summary.push(("switch_count".into(), sg.switch_count.to_string()));
    }
    if let Some(Ok(r)) = &rate {
        summary.push(("rate_order".into(), format!("{:.4}", r.order)));
        summary.push(("superlinear".into(), r.superlinear.to_string()));
    }
    if let Some(msg) = &report.message {
        summary.push(("message".into(), msg.replace('\n', " ")));
    }

    if let Some(path) = &spec.out {
        write_trace(BufWriter::new(File::create(path)?), &report.trace, &summary)?;
    }
    Ok(RunOutcome {
        report,
        gamma,
        rate,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_synthetic(seed: u64) -> ProblemSpec {
        ProblemSpec::SyntheticLasso(SyntheticLassoParams {
            n: 128,
            m: 48,
            k: 5,
            seed,
            ..Default::default()
        })
    }

    #[test]
    fn solver_names_parse() {
        for s in [SolverKind::Tmap, SolverKind::TmapSafe, SolverKind::ProxGrad] {
            assert_eq!(s.as_str().parse::<SolverKind>().unwrap(), s);
        }
        assert!("newton".parse::<SolverKind>().is_err());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            status_exit_code(SolveStatus::Converged),
            status_exit_code(SolveStatus::MaxIters),
            error_exit_code(&TmapError::Parameter(String::new())),
            error_exit_code(&TmapError::Data(String::new())),
            status_exit_code(SolveStatus::LinesearchFailure),
            status_exit_code(SolveStatus::NumericError),
        ];
        let mut sorted = codes.to_vec();
        sorted.dedup();
        assert_eq!(sorted.len(), codes.len());
        assert_eq!(codes[0], 0);
    }

    #[test]
    fn synthetic_run_is_deterministic() {
        let mut spec = RunSpec::new(small_synthetic(3), SolverKind::Tmap);
        spec.config.tol = 1e-9;
        let a = run(&spec).unwrap();
        let b = run(&spec).unwrap();
        assert_eq!(a.exit_code(), 0);
        assert_eq!(a.report.trace, b.report.trace);
        assert_eq!(a.report.x_final, b.report.x_final);
    }

    #[test]
    fn tighter_tolerance_gives_smaller_residual() {
        let mut last = f64::INFINITY;
        for tol in [1e-6, 1e-8, 1e-10] {
            let mut spec = RunSpec::new(small_synthetic(5), SolverKind::Tmap);
            spec.config.tol = tol;
            let out = run(&spec).unwrap();
            assert_eq!(out.report.status, SolveStatus::Converged);
            assert!(out.report.final_residual() <= last);
            last = out.report.final_residual();
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let spec = RunSpec::new(
            ProblemSpec::Logistic {
                data: "/nonexistent/file.svm".into(),
                n_features: None,
            },
            SolverKind::Tmap,
        );
        let err = run(&spec).unwrap_err();
        assert_eq!(error_exit_code(&err), 3);
    }

    #[test]
    fn logistic_gamma_defaults_to_inverse_sample_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.svm");
        std::fs::write(&path, "1 1:1 2:0.5\n-1 1:-1\n1 2:2\n-1 1:0.3 2:-1\n").unwrap();
        let mut spec = RunSpec::new(
            ProblemSpec::Logistic {
                data: path,
                n_features: None,
            },
            SolverKind::TmapSafe,
        );
        spec.out = Some(dir.path().join("trace.csv"));
        let out = run(&spec).unwrap();
        assert_eq!(out.gamma, 0.25);
        let text = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
        let parsed = crate::trace::read_trace(text.as_bytes()).unwrap();
        assert_eq!(parsed.records, out.report.trace);
        assert!(parsed.summary.iter().any(|(k, _)| k == "status"));
    }
}
