//! Averaged logistic loss `f(x) = (1/m) Σ log(1 + exp(-b_i a_i^T x))`.

use super::{boxed_hessian, HessianOperator, LinearOperator, ProblemOracle, SparseRowMatrix};
use crate::error::{check_len, Result, TmapError};

#[derive(Debug, Clone)]
pub struct LogisticProblem {
    a: SparseRowMatrix,
    b: Vec<f64>,
}

/// `log(1 + exp(z))` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z <= 0.0 {
        z.exp().ln_1p()
    } else {
        z + (-z).exp().ln_1p()
    }
}

/// `1 / (1 + exp(-z))` without overflow.
#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `softplus(z + d) - softplus(z) - sigmoid(z) d`, accurate for small `d`.
fn softplus_divergence(z: f64, d: f64) -> f64 {
    // The divergence is invariant under (z, d) -> (-z, -d); keep sigmoid(z) <= 1/2
    // so the two terms below do not cancel.
    let (z, d) = if z > 0.0 { (-z, -d) } else { (z, d) };
    // softplus(z + d) - softplus(z) = log1p(s * expm1(d)) with s = sigmoid(z).
    let s = sigmoid(z);
    let em1 = d.exp_m1();
    let u = s * em1;
    // log1p(u) - u and expm1(d) - d, each by series when the argument is small.
    let log_part = if u.abs() < 1e-3 {
        -u * u * (0.5 - u * (1.0 / 3.0 - u * (0.25 - u / 5.0)))
    } else {
        u.ln_1p() - u
    };
    let exp_part = if d.abs() < 1e-3 {
        d * d * (0.5 + d * (1.0 / 6.0 + d * (1.0 / 24.0 + d / 120.0)))
    } else {
        em1 - d
    };
    (log_part + s * exp_part).max(0.0)
}

/// `exp(-z) / (1 + exp(-z))^2`, symmetric in `z` and bounded by 1/4.
#[inline]
fn sigmoid_slope(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

impl LogisticProblem {
    /// `labels` must be exactly -1 or +1 and match the row count of `a`.
    pub fn new(a: SparseRowMatrix, labels: Vec<f64>) -> Result<Self> {
        check_len(a.nrows(), labels.len())?;
        if let Some((i, l)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l != 1.0 && l != -1.0)
        {
            return Err(TmapError::Data(format!(
                "label {l} at sample {i} is not -1 or +1"
            )));
        }
        if labels.is_empty() {
            return Err(TmapError::Data(
                "logistic problem needs at least one sample".into(),
            ));
        }
        Ok(Self { a, b: labels })
    }

    pub fn samples(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &SparseRowMatrix {
        &self.a
    }

    pub fn labels(&self) -> &[f64] {
        &self.b
    }

    /// Hessian weights `D_ii` at `x`.
    pub fn hessian_weights(&self, x: &[f64]) -> Vec<f64> {
        (0..self.b.len())
            .map(|i| sigmoid_slope(self.b[i] * self.a.row_dot(i, x)))
            .collect()
    }
}

impl ProblemOracle for LogisticProblem {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let m = self.b.len() as f64;
        (0..self.b.len())
            .map(|i| softplus(-self.b[i] * self.a.row_dot(i, x)))
            .sum::<f64>()
            / m
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let m = self.b.len() as f64;
        let mut value = 0.0;
        let mut weights = vec![0.0; self.b.len()];
        for (i, w) in weights.iter_mut().enumerate() {
            let margin = self.b[i] * self.a.row_dot(i, x);
            value += softplus(-margin);
            *w = -self.b[i] * sigmoid(-margin) / m;
        }
        self.a.adjoint(&weights, grad);
        value / m
    }

    fn divergence(&self, x: &[f64], y: &[f64], _grad_x: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let total: f64 = (0..self.b.len())
            .map(|i| {
                let z = -self.b[i] * self.a.row_dot(i, x);
                let dz = -self.b[i] * self.a.row_dot(i, &d);
                softplus_divergence(z, dz)
            })
            .sum();
        total / self.b.len() as f64
    }

    fn hessian<'a>(&'a self, x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        let m = self.b.len() as f64;
        let d: Vec<f64> = self.hessian_weights(x).into_iter().map(|w| w / m).collect();
        Ok(boxed_hessian(move |v: &[f64], out: &mut [f64]| {
            let mut av = vec![0.0; d.len()];
            self.a.apply(v, &mut av);
            for (u, w) in av.iter_mut().zip(&d) {
                *u *= w;
            }
            self.a.adjoint(&av, out);
        }))
    }
}
