//! Smooth objective oracles and the linear operators behind them.

mod dct;
mod generator;
mod lasso;
mod logistic;
mod operator;
mod quadratic;
mod sparse;

pub use dct::{dct2_reference, dct3_reference, PartialDctOperator};
pub use generator::{
    generate_lasso_instance, read_instance, write_instance, SyntheticLasso, SyntheticLassoParams,
};
pub use lasso::LassoProblem;
pub use logistic::LogisticProblem;
pub use operator::{DenseMatrix, IdentityOperator, LinearOperator};
pub use quadratic::{Quadratic, SmoothNonconvex};
pub use sparse::SparseRowMatrix;

use crate::error::{Result, TmapError};

/// Hessian of the smooth part, frozen at one point and applied matrix-free.
pub trait HessianOperator {
    /// `out = ∇²f(x) v` for the point the operator was built at.
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

/// Value, gradient and Hessian-vector products of a smooth function `f`.
///
/// The `gamma * ||x||_1` term is handled by the solvers, not the oracle.
pub trait ProblemOracle {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes `∇f(x)` into `grad` and returns `f(x)`.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Builds the Hessian operator at `x`. Oracles without second-order
    /// information keep the default.
    fn hessian<'a>(&'a self, _x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        Err(TmapError::Capability("Hessian-vector products"))
    }

    /// Bregman divergence `f(y) - f(x) - ∇f(x)^T (y - x)`.
    ///
    /// The default subtracts two function values, which loses all precision
    /// once `y - x` is tiny; oracles override it with a formulation that is
    /// accurate relative to the divergence itself.
    fn divergence(&self, x: &[f64], y: &[f64], grad_x: &[f64]) -> f64 {
        let lin: f64 = grad_x
            .iter()
            .zip(y.iter().zip(x))
            .map(|(g, (yi, xi))| g * (yi - xi))
            .sum();
        self.value(y) - self.value(x) - lin
    }

    fn hessvec(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let h = self.hessian(x)?;
        let mut out = vec![0.0; v.len()];
        h.apply(v, &mut out);
        Ok(out)
    }
}

impl<T: ProblemOracle + ?Sized> ProblemOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_grad(x, grad)
    }
    fn hessian<'a>(&'a self, x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        (**self).hessian(x)
    }
    fn divergence(&self, x: &[f64], y: &[f64], grad_x: &[f64]) -> f64 {
        (**self).divergence(x, y, grad_x)
    }
}

impl<T: ProblemOracle + ?Sized> ProblemOracle for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_grad(x, grad)
    }
    fn hessian<'a>(&'a self, x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        (**self).hessian(x)
    }
    fn divergence(&self, x: &[f64], y: &[f64], grad_x: &[f64]) -> f64 {
        (**self).divergence(x, y, grad_x)
    }
}

struct FnHessian<F>(F);

impl<F: Fn(&[f64], &mut [f64])> HessianOperator for FnHessian<F> {
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        (self.0)(v, out)
    }
}

pub(crate) fn boxed_hessian<'a, F>(f: F) -> Box<dyn HessianOperator + 'a>
where
    F: Fn(&[f64], &mut [f64]) + 'a,
{
    Box::new(FnHessian(f))
}
