//! Safeguarded TMAP and the backtracking proximal-gradient method.
//!
//! The safeguarded variant accepts TMAP steps under a weakened test that uses
//! `mu^eta` and, whenever the accepted TMAP step length is at most `tau_th`,
//! discards the TMAP trial point and takes a proximal-gradient step instead.

use std::time::Instant;

use crate::analysis::{active_set_fingerprint, track_identification};
use crate::error::{check_len, Result, TmapError};
use crate::problems::ProblemOracle;
use crate::prox::{prox_l1, stationarity_residual, ProxParams};
use crate::solver::{
    run_tmap, sufficient_decrease, IterationRecord, SolveReport, SolveStatus, SolverConfig, Variant,
};
use crate::vector::{all_finite, norm1, DenseVector};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SafeguardStats {
    pub switch_count: usize,
    pub switch_iterations: Vec<usize>,
}

impl SafeguardStats {
    pub(crate) fn record(&mut self, k: usize) {
        self.switch_count += 1;
        self.switch_iterations.push(k);
    }
}

pub(crate) struct ProxGradStep {
    pub x: Vec<f64>,
    pub grad: Vec<f64>,
    pub psi: f64,
    pub t: f64,
    pub backtracks: usize,
}

/// Backtracking from `t = 1` on
/// `psi(x) - psi(x+) >= sigma t ||(x - x+) / t||^2`, `x+ = prox_{t h}(x - t g)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn prox_grad_linesearch<O: ProblemOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    psi_x: f64,
    grad: &[f64],
    gamma: f64,
    sigma: f64,
    beta: f64,
    max_backtracks: usize,
) -> Option<ProxGradStep> {
    let n = x.len();
    let mut t = 1.0;
    for attempt in 0..=max_backtracks {
        let v: Vec<f64> = x.iter().zip(grad).map(|(xi, gi)| xi - t * gi).collect();
        let y = prox_l1(&v, ProxParams::new(gamma, t).ok()?);
        let mut gy = vec![0.0; n];
        let psi_y = oracle.value_grad(&y, &mut gy) + gamma * norm1(&y);
        let move_sq: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        let threshold = sigma * t * (move_sq / (t * t));
        if let Some(psi) = sufficient_decrease(oracle, gamma, x, psi_x, grad, &y, psi_y, threshold)
        {
            return Some(ProxGradStep {
                x: y,
                grad: gy,
                psi,
                t,
                backtracks: attempt,
            });
        }
        t *= beta;
    }
    None
}

/// One backtracking proximal-gradient step from `x`; returns the new point
/// and the accepted step length.
pub fn prox_grad_step<O: ProblemOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    gamma: f64,
    sigma: f64,
    beta: f64,
) -> Result<(Vec<f64>, f64)> {
    check_len(oracle.dim(), x.len())?;
    ProxParams::new(gamma, 1.0)?;
    let mut g = vec![0.0; x.len()];
    let psi = oracle.value_grad(x, &mut g) + gamma * norm1(x);
    if !psi.is_finite() || !all_finite(&g) {
        return Err(TmapError::Numeric(
            "non-finite objective or gradient".into(),
        ));
    }
    let max_backtracks = SolverConfig::default().max_backtracks;
    prox_grad_linesearch(oracle, x, psi, &g, gamma, sigma, beta, max_backtracks)
        .map(|s| (s.x, s.t))
        .ok_or_else(|| {
            TmapError::LinesearchFailure(format!(
                "no sufficient decrease after {max_backtracks} backtracks"
            ))
        })
}

/// Safeguarded TMAP with `config.eta` and `config.tau_th`.
pub fn solve_safeguarded<O: ProblemOracle + ?Sized>(
    oracle: &O,
    x0: &DenseVector,
    config: &SolverConfig,
) -> Result<SolveReport> {
    run_tmap(
        oracle,
        x0,
        config,
        Variant::Safeguarded {
            eta: config.eta,
            tau_th: config.tau_th,
        },
    )
}

/// Plain backtracking proximal-gradient method, used as a reference solver.
pub fn solve_prox_grad<O: ProblemOracle + ?Sized>(
    oracle: &O,
    x0: &DenseVector,
    config: &SolverConfig,
) -> Result<SolveReport> {
    config.validate()?;
    let n = oracle.dim();
    check_len(n, x0.len())?;
    let start = Instant::now();
    let gamma = config.gamma;
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut psi = oracle.value_grad(&x, &mut g) + gamma * norm1(&x);
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
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
        rec.residual_norm = stationarity_residual(&x, &g, gamma)?.norm;
        if rec.residual_norm <= config.tol {
            trace.push(rec);
            break SolveStatus::Converged;
        }
        if k >= config.max_outer {
            trace.push(rec);
            break SolveStatus::MaxIters;
        }
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
            rec.backtracks = config.max_backtracks;
            trace.push(rec);
            message = Some(format!("no sufficient decrease at iteration {k}"));
            break SolveStatus::LinesearchFailure;
        };
        rec.t_k = Some(step.t);
        rec.backtracks = step.backtracks;
        trace.push(rec);
        x = step.x;
        g = step.grad;
        psi = step.psi;
    };

    let identification_iter = track_identification(&trace);
    Ok(SolveReport {
        x_final: DenseVector::new(x).expect("accepted iterates have finite objective"),
        status,
        trace,
        identification_iter,
        newton_log: Vec::new(),
        iterates,
        safeguard: None,
        elapsed: start.elapsed(),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{
        DenseMatrix, IdentityOperator, LassoProblem, Quadratic, SmoothNonconvex,
    };
    use crate::solver::solve;

    #[test]
    fn prox_grad_step_examples() {
        let q = Quadratic::identity(1);
        let (x, t) = prox_grad_step(&q, &[3.0], 1.0, 0.1, 0.5).unwrap();
        assert_eq!((x, t), (vec![0.0], 1.0));

        let p = LassoProblem::new(IdentityOperator(2), vec![3.0, 0.5]).unwrap();
        let (x, _) = prox_grad_step(&p, &[2.0, 0.0], 1.0, 0.1, 0.5).unwrap();
        assert_eq!(x, vec![2.0, 0.0]);

        // gamma = 0: prox is the identity, one gradient step lands on b.
        let (x, t) = prox_grad_step(&p, &[0.0, 0.0], 0.0, 0.1, 0.5).unwrap();
        assert_eq!((x, t), (vec![3.0, 0.5], 1.0));
        assert!(prox_grad_step(&p, &[0.0], 1.0, 0.1, 0.5).is_err());
    }

    #[test]
    fn zero_threshold_never_switches() {
        let p = LassoProblem::new(
            DenseMatrix::new(2, 3, vec![1.0, 0.5, 0.0, 0.2, 1.0, 0.7]).unwrap(),
            vec![1.0, -2.0],
        )
        .unwrap();
        let cfg = SolverConfig {
            eta: 1.0,
            tau_th: 0.0,
            tol: 1e-12,
            ..SolverConfig::with_gamma(0.1)
        };
        let x0 = DenseVector::zeros(3);
        let safe = solve_safeguarded(&p, &x0, &cfg).unwrap();
        let plain = solve(&p, &x0, &cfg).unwrap();
        assert_eq!(safe.safeguard.as_ref().unwrap().switch_count, 0);
        assert_eq!(safe.trace, plain.trace);
        assert_eq!(safe.x_final, plain.x_final);
        assert!(plain.safeguard.is_none());
    }

    #[test]
    fn nonconvex_smoke() {
        let center: Vec<f64> = (0..20).map(|i| (i as f64 - 9.5) / 3.0).collect();
        let f = SmoothNonconvex::with_center(center);
        let cfg = SolverConfig {
            tol: 1e-4,
            ..SolverConfig::with_gamma(0.1)
        };
        let x0 =
            DenseVector::new((0..20).map(|i| ((i * 7) % 11) as f64 * 0.4 - 2.0).collect()).unwrap();
        let r = solve_safeguarded(&f, &x0, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Converged, "{:?}", r.message);
        assert!(r.final_residual() <= 1e-4);
        for w in r.trace.windows(2) {
            assert!(w[1].psi <= w[0].psi);
        }
        let stats = r.safeguard.unwrap();
        assert_eq!(stats.switch_count, stats.switch_iterations.len());
        assert_eq!(
            stats.switch_count,
            r.trace.iter().filter(|t| t.used_safeguard).count()
        );
    }

    #[test]
    fn prox_grad_solver_converges() {
        let p = LassoProblem::new(IdentityOperator(2), vec![3.0, 0.5]).unwrap();
        let cfg = SolverConfig {
            tol: 1e-12,
            ..SolverConfig::with_gamma(1.0)
        };
        let r = solve_prox_grad(&p, &DenseVector::zeros(2), &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert_eq!(r.x_final.as_slice(), &[2.0, 0.0]);
        assert!(r.newton_log.is_empty());
    }
}
