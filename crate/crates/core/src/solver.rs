//! The TMAP main loop.
//!
//! Per iteration: evaluate the stationarity residual, partition the indices,
//! solve the regularized Newton system on `I-`, assemble the step `p_k`, and
//! backtrack from `t = 1` until
//!
//! ```text
//! psi(x) - psi(x(t)) >= sigma t (1 - tau) mu^eta ||p_bar||^2 + sigma t ||G_t||^2
//! ```
//!
//! holds, where `x(t)` is the adaptive projection of `x - t p_k` and `G_t` the
//! gradient map on `I+`. Plain TMAP uses `eta = 1`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::analysis::{active_set_fingerprint, track_identification};
use crate::error::{check_len, Result, TmapError};
use crate::partition::{adaptive_project, partition_with_pi, Block, IndexPartition};
use crate::problems::ProblemOracle;
use crate::prox::stationarity_residual;
use crate::safeguard::{prox_grad_linesearch, SafeguardStats};
use crate::subproblem::{compute_mu, solve_newton, CgStopReason, NewtonSolveStats};
use crate::vector::{all_finite, dot, norm1, norm2, DenseVector};

/// Solver tunables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Weight of the l1 term.
    pub gamma: f64,
    /// Accuracy level bounding the partition band, `eps_k = min(eps, pi_k)`.
    pub eps_accuracy: f64,
    /// Sufficient-decrease parameter in (0, 1).
    pub sigma: f64,
    /// Backtracking factor in (0, 1).
    pub beta: f64,
    /// CG inexactness in (0, 1).
    pub tau: f64,
    /// Scale of the Newton regularization `mu = c * ||.||^delta`.
    pub c: f64,
    /// Exponent of the Newton regularization in (0, 1).
    pub delta: f64,
    /// Exponent on `mu` in the safeguarded acceptance test.
    pub eta: f64,
    /// Step length at or below which the safeguarded solver falls back to a
    /// proximal-gradient step.
    pub tau_th: f64,
    /// Stop once the stationarity residual is at most `tol`.
    pub tol: f64,
    pub max_outer: usize,
    pub max_backtracks: usize,
    /// Upper bound on CG iterations; the effective cap is `min(|I-|, max_cg)`.
    pub max_cg: usize,
    /// Keep every iterate in [`SolveReport::iterates`].
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            eps_accuracy: 1e-2,
            sigma: 1e-4,
            beta: 0.5,
            tau: 0.1,
            c: 1e-4,
            delta: 0.5,
            eta: 0.5,
            tau_th: 1e-4,
            tol: 1e-6,
            max_outer: 1000,
            max_backtracks: 60,
            max_cg: 100,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn with_gamma(gamma: f64) -> Self {
        Self {
            gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn open_unit(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(TmapError::Parameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )))
            }
        }
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(TmapError::Parameter(format!("{name} must be > 0, got {v}")))
            }
        }
        positive("gamma", self.gamma)?;
        positive("eps", self.eps_accuracy)?;
        positive("c", self.c)?;
        positive("tol", self.tol)?;
        open_unit("sigma", self.sigma)?;
        open_unit("beta", self.beta)?;
        open_unit("tau", self.tau)?;
        open_unit("delta", self.delta)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(TmapError::Parameter(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if !(0.0..1.0).contains(&self.tau_th) {
            return Err(TmapError::Parameter(format!(
                "tau_th must lie in [0, 1), got {}",
                self.tau_th
            )));
        }
        if self.max_cg == 0 {
            return Err(TmapError::Parameter("max_cg must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    LinesearchFailure,
    NumericError,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::LinesearchFailure => "linesearch_failure",
            SolveStatus::NumericError => "numeric_error",
        }
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = TmapError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(Self::Converged),
            "max_iters" => Ok(Self::MaxIters),
            "linesearch_failure" => Ok(Self::LinesearchFailure),
            "numeric_error" => Ok(Self::NumericError),
            other => Err(TmapError::Data(format!("unknown status '{other}'"))),
        }
    }
}

/// One row of the iteration trace, describing `x_k` and the step taken from it.
///
/// Step fields (`t_k`, `mu_k`) are `None` on the terminal row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub psi: f64,
    pub residual_norm: f64,
    pub t_k: Option<f64>,
    pub mu_k: Option<f64>,
    pub minus_set_size: usize,
    pub cg_iters: usize,
    pub active_set_fingerprint: u64,
    pub used_safeguard: bool,
    pub backtracks: usize,
}

/// Diagnostics of one Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRecord {
    pub k: usize,
    pub stats: NewtonSolveStats,
    /// `||g_bar + omega_bar||`
    pub rhs_norm: f64,
    /// `||p_bar||`
    pub step_norm: f64,
    /// `(g_bar + omega_bar)^T p_bar`
    pub pairing: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x_final: DenseVector,
    pub status: SolveStatus,
    pub trace: Vec<IterationRecord>,
    pub identification_iter: Option<usize>,
    pub newton_log: Vec<NewtonRecord>,
    /// Every iterate `x_0, x_1, ...` when `record_iterates` is set.
    pub iterates: Vec<Vec<f64>>,
    pub safeguard: Option<SafeguardStats>,
    pub elapsed: Duration,
    pub message: Option<String>,
}

impl SolveReport {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.residual_norm)
    }

    pub fn final_psi(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.psi)
    }

    pub fn cg_max_iter_hits(&self) -> usize {
        self.newton_log
            .iter()
            .filter(|r| r.stats.stop_reason == CgStopReason::MaxIters)
            .count()
    }
}

/// Full-length step: `g` on `I+` (where the shift is zero), `p_bar` on `I-`.
pub fn build_step(g: &[f64], part: &IndexPartition, p_bar: &[f64]) -> Result<Vec<f64>> {
    check_len(part.len(), g.len())?;
    check_len(part.minus_len(), p_bar.len())?;
    let mut p = g.to_vec();
    let mut bar = p_bar.iter();
    for (pi, b) in p.iter_mut().zip(part.blocks()) {
        if *b != Block::Plus {
            *pi = *bar.next().expect("length checked");
        }
    }
    Ok(p)
}

/// `x(t) = P(x - t p)` for the adaptive projection of `part`.
pub fn trial_point(
    x: &[f64],
    p: &[f64],
    t: f64,
    part: &IndexPartition,
    gamma: f64,
) -> Result<Vec<f64>> {
    check_len(x.len(), p.len())?;
    let v: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi - t * pi).collect();
    adaptive_project(&v, part, t, gamma)
}

/// Right-hand side of the sufficient-decrease test with `mu_eta = mu^eta`.
fn decrease_threshold(
    t: f64,
    mu_eta: f64,
    p_bar_norm: f64,
    gmap_norm_sq: f64,
    sigma: f64,
    tau: f64,
) -> f64 {
    sigma * t * (1.0 - tau) * mu_eta * p_bar_norm * p_bar_norm + sigma * t * gmap_norm_sq
}

fn mu_power(mu: f64, eta: f64) -> f64 {
    if eta == 1.0 {
        mu
    } else {
        mu.powf(eta)
    }
}

/// `psi(x) - psi(x(t)) >= sigma t (1 - tau) mu^eta ||p_bar||^2 + sigma t ||G_t||^2`.
#[allow(clippy::too_many_arguments)]
pub fn acceptance_test(
    psi_x: f64,
    psi_trial: f64,
    t: f64,
    mu: f64,
    p_bar_norm: f64,
    gmap_norm: f64,
    sigma: f64,
    tau: f64,
    eta: f64,
) -> bool {
    psi_x - psi_trial
        >= decrease_threshold(
            t,
            mu_power(mu, eta),
            p_bar_norm,
            gmap_norm * gmap_norm,
            sigma,
            tau,
        )
}

// Relative size below which a directly computed drop in psi is treated as
// rounding noise.
const DROP_NOISE: f64 = 1e-8;

/// Decides sufficient decrease from `x` to `y` and returns the value of psi
/// to carry forward.
///
/// The direct difference `psi_x - psi_y` is used when it is conclusive. When
/// it is within rounding noise of zero, the decrease is recomputed as
/// `-(Σ g_i d_i + gamma (|y_i| - |x_i|)) - D_f(y, x)` with the oracle's
/// divergence, which stays accurate for tiny steps; the carried value is then
/// `psi_x` minus that decrease.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sufficient_decrease<O: ProblemOracle + ?Sized>(
    oracle: &O,
    gamma: f64,
    x: &[f64],
    psi_x: f64,
    grad_x: &[f64],
    y: &[f64],
    psi_y: f64,
    threshold: f64,
) -> Option<f64> {
    if !psi_y.is_finite() {
        return None;
    }
    let drop = psi_x - psi_y;
    if drop >= threshold {
        return Some(psi_y);
    }
    let scale = psi_x.abs().max(psi_y.abs()).max(1.0);
    if drop.abs() > DROP_NOISE * scale {
        return None;
    }
    let linear: f64 = x
        .iter()
        .zip(y)
        .zip(grad_x)
        .filter(|((xi, yi), _)| xi != yi)
        .map(|((xi, yi), gi)| gi * (yi - xi) + gamma * (yi.abs() - xi.abs()))
        .sum();
    let accurate = -linear - oracle.divergence(x, y, grad_x);
    if accurate >= threshold {
        Some(psi_x - accurate)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Variant {
    Plain,
    Safeguarded { eta: f64, tau_th: f64 },
}

/// Runs TMAP from `x0`.
///
/// Returns `Err` only for invalid input (bad configuration, dimension
/// mismatch, missing Hessian capability); solver outcomes such as
/// linesearch failure are reported through [`SolveReport::status`].
pub fn solve<O: ProblemOracle + ?Sized>(
    oracle: &O,
    x0: &DenseVector,
    config: &SolverConfig,
) -> Result<SolveReport> {
    run_tmap(oracle, x0, config, Variant::Plain)
}

pub(crate) fn run_tmap<O: ProblemOracle + ?Sized>(
    oracle: &O,
    x0: &[f64],
    config: &SolverConfig,
    variant: Variant,
) -> Result<SolveReport> {
    config.validate()?;
    let n = oracle.dim();
    check_len(n, x0.len())?;
    let start = Instant::now();
    let gamma = config.gamma;
    let (eta, tau_th) = match variant {
        Variant::Plain => (1.0, 0.0),
        Variant::Safeguarded { eta, tau_th } => (eta, tau_th),
    };

    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut psi = oracle.value_grad(&x, &mut g) + gamma * norm1(&x);

    let mut trace = Vec::new();
    let mut newton_log = Vec::new();
    let mut iterates = Vec::new();
    let mut switches = SafeguardStats::default();
    let mut message = None;

    let status = loop {
        let k = trace.len();
        if config.record_iterates {
            iterates.push(x.clone());
        }
        let mut rec = IterationRecord {
            k,
            psi,
            residual_norm: f64::NAN,
            t_k: None,
            mu_k: None,
            minus_set_size: 0,
            cg_iters: 0,
            active_set_fingerprint: active_set_fingerprint(&x),
            used_safeguard: false,
            backtracks: 0,
        };
        if !psi.is_finite() || !all_finite(&g) {
            trace.push(rec);
            message = Some(format!("non-finite objective or gradient at iteration {k}"));
            break SolveStatus::NumericError;
        }
        let residual = stationarity_residual(&x, &g, gamma)?;
        rec.residual_norm = residual.norm;
        if residual.norm <= config.tol {
            trace.push(rec);
            break SolveStatus::Converged;
        }
        if k >= config.max_outer {
            trace.push(rec);
            break SolveStatus::MaxIters;
        }

        let part = partition_with_pi(&x, &g, config.eps_accuracy, gamma, residual.norm)?;
        let i_minus = part.i_minus();
        let rhs: Vec<f64> = i_minus
            .iter()
            .map(|&i| match part.block(i) {
                Block::MinusPos => g[i] + gamma,
                Block::MinusNeg => g[i] - gamma,
                Block::Plus => unreachable!(),
            })
            .collect();
        let residual_plus: Vec<f64> = part.i_plus.iter().map(|&i| residual.vector[i]).collect();
        let mu = compute_mu(&residual_plus, &rhs, config.c, config.delta);
        let max_cg = config.max_cg.min(i_minus.len());
        let (p_bar, stats) = match solve_newton(oracle, &x, &i_minus, &rhs, mu, config.tau, max_cg)
        {
            Ok(out) => out,
            Err(TmapError::Numeric(msg)) => {
                trace.push(rec);
                message = Some(msg);
                break SolveStatus::NumericError;
            }
            Err(e) => return Err(e),
        };
        let p_bar_norm = norm2(&p_bar);
        newton_log.push(NewtonRecord {
            k,
            stats,
            rhs_norm: norm2(&rhs),
            step_norm: p_bar_norm,
            pairing: dot(&rhs, &p_bar),
        });
        rec.mu_k = Some(mu);
        rec.minus_set_size = i_minus.len();
        rec.cg_iters = stats.cg_iterations;

        let p = build_step(&g, &part, &p_bar)?;
        let mu_eta = mu_power(mu, eta);
        let mut t = 1.0;
        let mut accepted = None;
        for attempt in 0..=config.max_backtracks {
            let y = trial_point(&x, &p, t, &part, gamma)?;
            let mut gy = vec![0.0; n];
            let psi_y = oracle.value_grad(&y, &mut gy) + gamma * norm1(&y);
            let gmap_sq: f64 = part
                .i_plus
                .iter()
                .map(|&i| {
                    let gi = (x[i] - y[i]) / t;
                    gi * gi
                })
                .sum();
            let threshold =
                decrease_threshold(t, mu_eta, p_bar_norm, gmap_sq, config.sigma, config.tau);
            if let Some(psi_next) =
                sufficient_decrease(oracle, gamma, &x, psi, &g, &y, psi_y, threshold)
            {
                accepted = Some((y, gy, psi_next));
                rec.backtracks = attempt;
                break;
            }
            t *= config.beta;
        }

        match accepted {
            Some((y, gy, psi_next)) if t > tau_th => {
                rec.t_k = Some(t);
                x = y;
                g = gy;
                psi = psi_next;
            }
            _ if tau_th > 0.0 => {
                let tmap_backtracks = if accepted.is_some() {
                    rec.backtracks
                } else {
                    config.max_backtracks
                };
                let Some(step) = prox_grad_linesearch(
                    oracle,
                    &x,
                    psi,
                    &g,
                    gamma,
                    config.sigma,
                    config.beta,
                    config.max_backtracks,
                ) else {
                    rec.backtracks = tmap_backtracks + config.max_backtracks;
                    trace.push(rec);
                    message = Some(format!(
                        "proximal-gradient backtracking exhausted at iteration {k}"
                    ));
                    break SolveStatus::LinesearchFailure;
                };
                rec.t_k = Some(step.t);
                rec.used_safeguard = true;
                rec.backtracks = tmap_backtracks + step.backtracks;
                switches.record(k);
                x = step.x;
                g = step.grad;
                psi = step.psi;
            }
            _ => {
                rec.backtracks = config.max_backtracks;
                trace.push(rec);
                message = Some(format!(
                    "no sufficient decrease after {} backtracks at iteration {k}",
                    config.max_backtracks
                ));
                break SolveStatus::LinesearchFailure;
            }
        }
        trace.push(rec);
    };

    let identification_iter = track_identification(&trace);
    Ok(SolveReport {
        x_final: DenseVector::new(x).expect("accepted iterates have finite objective"),
        status,
        trace,
        identification_iter,
        newton_log,
        iterates,
        safeguard: matches!(variant, Variant::Safeguarded { .. }).then_some(switches),
        elapsed: start.elapsed(),
        message,
    })
}
