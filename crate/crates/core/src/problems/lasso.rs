//! Least-squares data term `f(x) = 1/2 ||A x - b||^2`.

use std::sync::atomic::{AtomicU64, Ordering};

use super::{boxed_hessian, HessianOperator, LinearOperator, ProblemOracle};
use crate::error::{check_len, Result};

#[derive(Debug)]
pub struct LassoProblem<Op> {
    op: Op,
    b: Vec<f64>,
    // Number of applications of A or A^T.
    op_calls: AtomicU64,
}

impl<Op: LinearOperator> LassoProblem<Op> {
    pub fn new(op: Op, b: Vec<f64>) -> Result<Self> {
        check_len(op.rows(), b.len())?;
        Ok(Self {
            op,
            b,
            op_calls: AtomicU64::new(0),
        })
    }

    pub fn operator(&self) -> &Op {
        &self.op
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn op_calls(&self) -> u64 {
        self.op_calls.load(Ordering::Relaxed)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.op_calls.fetch_add(1, Ordering::Relaxed);
        self.op.apply(x, out);
    }

    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.op_calls.fetch_add(1, Ordering::Relaxed);
        self.op.adjoint(y, out);
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.b.len()];
        self.apply(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        r
    }

    /// Value, gradient and `A^T A v` in one call.
    pub fn evaluate(&self, x: &[f64], v: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let mut grad = vec![0.0; self.op.cols()];
        let value = self.value_grad(x, &mut grad);
        let mut hv = vec![0.0; self.op.cols()];
        self.gram(v, &mut hv);
        (value, grad, hv)
    }

    fn gram(&self, v: &[f64], out: &mut [f64]) {
        let mut av = vec![0.0; self.op.rows()];
        self.apply(v, &mut av);
        self.adjoint(&av, out);
    }
}

impl<Op: LinearOperator> ProblemOracle for LassoProblem<Op> {
    fn dim(&self) -> usize {
        self.op.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = self.residual(x);
        0.5 * r.iter().map(|v| v * v).sum::<f64>()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let r = self.residual(x);
        self.adjoint(&r, grad);
        0.5 * r.iter().map(|v| v * v).sum::<f64>()
    }

    fn hessian<'a>(&'a self, _x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        Ok(boxed_hessian(move |v: &[f64], out: &mut [f64]| {
            self.gram(v, out)
        }))
    }

    fn divergence(&self, x: &[f64], y: &[f64], _grad_x: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let mut ad = vec![0.0; self.op.rows()];
        self.apply(&d, &mut ad);
        0.5 * ad.iter().map(|v| v * v).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{DenseMatrix, IdentityOperator};

    #[test]
    fn identity_gradient() {
        let p = LassoProblem::new(IdentityOperator(3), vec![1.0, -2.0, 0.5]).unwrap();
        let x = [0.5, 0.5, 0.5];
        let (v, g, hv) = p.evaluate(&x, &[1.0, 2.0, 3.0]);
        assert_eq!(g, vec![-0.5, 2.5, 0.0]);
        assert_eq!(v, 0.5 * (0.25 + 6.25));
        assert_eq!(hv, vec![1.0, 2.0, 3.0]);
        assert_eq!(p.op_calls(), 4);
    }

    #[test]
    fn null_space_direction() {
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let p = LassoProblem::new(a, vec![1.0]).unwrap();
        assert_eq!(
            p.hessvec(&[0.0, 0.0], &[1.0, -1.0]).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn rhs_length_checked() {
        assert!(LassoProblem::new(IdentityOperator(2), vec![1.0]).is_err());
    }
}
