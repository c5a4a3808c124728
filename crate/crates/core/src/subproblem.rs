//! Regularized Newton system on the `I-` block, solved by truncated CG.
//!
//! The system is `(H + mu I) p = rhs` with `H` the principal submatrix of the
//! Hessian on `I-`, accessed only through Hessian-vector products, and
//! `rhs = [g + omega]_{I-}`. CG stops as soon as its residual satisfies
//! `||r|| <= tau * min(mu ||p||, ||rhs||)`.

use crate::error::{check_len, Result, TmapError};
use crate::problems::{HessianOperator, ProblemOracle};
use crate::vector::{dot, norm2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStopReason {
    ToleranceMet,
    MaxIters,
    ZeroRhs,
    /// `d^T (H + mu I) d <= 0` was encountered; only possible for nonconvex `f`.
    NegativeCurvature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSolveStats {
    pub cg_iterations: usize,
    pub final_residual_norm: f64,
    pub mu: f64,
    pub stop_reason: CgStopReason,
}

/// `mu = c * ||[residual_plus; shifted_grad_minus]||^delta`.
pub fn compute_mu(residual_plus: &[f64], shifted_grad_minus: &[f64], c: f64, delta: f64) -> f64 {
    let sq = dot(residual_plus, residual_plus) + dot(shifted_grad_minus, shifted_grad_minus);
    c * sq.sqrt().powf(delta)
}

/// Hessian operator restricted to an index set: `v_bar -> [∇²f(x) embed(v_bar)]_{I-}`.
pub struct MaskedHessian<'a> {
    op: Box<dyn HessianOperator + 'a>,
    indices: &'a [usize],
    n: usize,
}

impl<'a> MaskedHessian<'a> {
    pub fn new<O: ProblemOracle + ?Sized>(
        oracle: &'a O,
        x: &[f64],
        indices: &'a [usize],
    ) -> Result<Self> {
        let n = oracle.dim();
        check_len(n, x.len())?;
        Ok(Self {
            op: oracle.hessian(x)?,
            indices,
            n,
        })
    }

    pub fn from_operator(
        op: Box<dyn HessianOperator + 'a>,
        n: usize,
        indices: &'a [usize],
    ) -> Self {
        Self { op, indices, n }
    }

    pub fn apply(&self, v_bar: &[f64], out: &mut [f64]) {
        let mut full = vec![0.0; self.n];
        for (&i, &v) in self.indices.iter().zip(v_bar) {
            full[i] = v;
        }
        let mut hv = vec![0.0; self.n];
        self.op.apply(&full, &mut hv);
        for (o, &i) in out.iter_mut().zip(self.indices) {
            *o = hv[i];
        }
    }
}

/// `[∇²f(x) embed(v_bar)]_{I-}` without forming the sub-Hessian.
pub fn masked_hessvec<O: ProblemOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    i_minus: &[usize],
    v_bar: &[f64],
) -> Result<Vec<f64>> {
    check_len(i_minus.len(), v_bar.len())?;
    let h = MaskedHessian::new(oracle, x, i_minus)?;
    let mut out = vec![0.0; v_bar.len()];
    h.apply(v_bar, &mut out);
    Ok(out)
}

/// Solves `(H + mu I) p = rhs` for the sub-Hessian of `oracle` at `x` on `i_minus`.
pub fn solve_newton<O: ProblemOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    i_minus: &[usize],
    rhs: &[f64],
    mu: f64,
    tau: f64,
    max_cg: usize,
) -> Result<(Vec<f64>, NewtonSolveStats)> {
    check_len(i_minus.len(), rhs.len())?;
    if rhs.iter().all(|v| *v == 0.0) {
        return Ok(zero_rhs(rhs.len(), mu));
    }
    let h = MaskedHessian::new(oracle, x, i_minus)?;
    solve_regularized(|v, out| h.apply(v, out), rhs, mu, tau, max_cg)
}

fn zero_rhs(len: usize, mu: f64) -> (Vec<f64>, NewtonSolveStats) {
    (
        vec![0.0; len],
        NewtonSolveStats {
            cg_iterations: 0,
            final_residual_norm: 0.0,
            mu,
            stop_reason: CgStopReason::ZeroRhs,
        },
    )
}

/// Truncated CG for `(H + mu I) p = rhs` given `H` as a closure.
///
/// On negative curvature in the first CG iteration the step falls back to
/// `p = rhs`; later it keeps the current iterate.
pub fn solve_regularized<F>(
    mut hess: F,
    rhs: &[f64],
    mu: f64,
    tau: f64,
    max_cg: usize,
) -> Result<(Vec<f64>, NewtonSolveStats)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if rhs.iter().all(|v| *v == 0.0) {
        return Ok(zero_rhs(rhs.len(), mu));
    }
    if !mu.is_finite() || mu <= 0.0 {
        return Err(TmapError::Parameter(format!("mu must be > 0, got {mu}")));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(TmapError::Parameter(format!(
            "tau must lie in [0, 1), got {tau}"
        )));
    }
    let len = rhs.len();
    let rhs_norm = norm2(rhs);
    let mut p = vec![0.0; len];
    let mut r = rhs.to_vec();
    let mut d = r.clone();
    let mut q = vec![0.0; len];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;

    let stats = |iterations, rr: f64, stop_reason| NewtonSolveStats {
        cg_iterations: iterations,
        final_residual_norm: rr.sqrt(),
        mu,
        stop_reason,
    };

    while iterations < max_cg {
        hess(&d, &mut q);
        for (qi, di) in q.iter_mut().zip(&d) {
            *qi += mu * di;
        }
        let dq = dot(&d, &q);
        if !dq.is_finite() {
            return Err(TmapError::Numeric(
                "non-finite Hessian-vector product".into(),
            ));
        }
        if dq <= 0.0 {
            if iterations == 0 {
                p.copy_from_slice(rhs);
            }
            return Ok((p, stats(iterations, rr, CgStopReason::NegativeCurvature)));
        }
        iterations += 1;
        let alpha = rr / dq;
        for i in 0..len {
            p[i] += alpha * d[i];
            r[i] -= alpha * q[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tau * (mu * norm2(&p)).min(rhs_norm) {
            return Ok((p, stats(iterations, rr_new, CgStopReason::ToleranceMet)));
        }
        let beta = rr_new / rr;
        for i in 0..len {
            d[i] = r[i] + beta * d[i];
        }
        rr = rr_new;
    }
    Ok((p, stats(iterations, rr, CgStopReason::MaxIters)))
}
