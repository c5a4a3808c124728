use super::{boxed_hessian, DenseMatrix, HessianOperator, LinearOperator, ProblemOracle};
use crate::error::{check_len, Result, TmapError};

/// `f(x) = 1/2 x^T Q x - c^T x` with a dense symmetric `Q`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    q: DenseMatrix,
    c: Vec<f64>,
}

impl Quadratic {
    pub fn new(q: DenseMatrix, c: Vec<f64>) -> Result<Self> {
        if q.rows() != q.cols() {
            return Err(TmapError::Parameter("Q must be square".into()));
        }
        check_len(q.rows(), c.len())?;
        for i in 0..q.rows() {
            for j in 0..i {
                if q.get(i, j) != q.get(j, i) {
                    return Err(TmapError::Parameter("Q must be symmetric".into()));
                }
            }
        }
        Ok(Self { q, c })
    }

    /// `f(x) = 1/2 ||x||^2`.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            q: DenseMatrix::new(n, n, data).expect("square"),
            c: vec![0.0; n],
        }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.q
    }
}

impl ProblemOracle for Quadratic {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut qx = vec![0.0; x.len()];
        self.q.apply(x, &mut qx);
        x.iter()
            .zip(&qx)
            .zip(&self.c)
            .map(|((xi, qi), ci)| 0.5 * xi * qi - ci * xi)
            .sum()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.q.apply(x, grad);
        let mut value = 0.0;
        for ((g, xi), ci) in grad.iter_mut().zip(x).zip(&self.c) {
            value += 0.5 * xi * *g - ci * xi;
            *g -= ci;
        }
        value
    }

    fn hessian<'a>(&'a self, _x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        Ok(boxed_hessian(move |v: &[f64], out: &mut [f64]| {
            self.q.apply(v, out)
        }))
    }

    fn divergence(&self, x: &[f64], y: &[f64], _grad_x: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let mut qd = vec![0.0; d.len()];
        self.q.apply(&d, &mut qd);
        0.5 * d.iter().zip(&qd).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Smooth nonconvex test objective `f(x) = Σ u_i^2 / (1 + u_i^2)` with
/// `u = x - center`.
///
/// Each term is concave for `|u_i| > 1/sqrt(3)`, so the Hessian is indefinite
/// away from the center.
#[derive(Debug, Clone)]
pub struct SmoothNonconvex {
    center: Vec<f64>,
}

impl SmoothNonconvex {
    pub fn new(n: usize) -> Self {
        Self {
            center: vec![0.0; n],
        }
    }

    pub fn with_center(center: Vec<f64>) -> Self {
        Self { center }
    }
}

impl ProblemOracle for SmoothNonconvex {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(xi, ci)| {
                let u = xi - ci;
                u * u / (1.0 + u * u)
            })
            .sum()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut value = 0.0;
        for ((g, xi), ci) in grad.iter_mut().zip(x).zip(&self.center) {
            let u = xi - ci;
            let d = 1.0 + u * u;
            value += u * u / d;
            *g = 2.0 * u / (d * d);
        }
        value
    }

    fn hessian<'a>(&'a self, x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        let diag: Vec<f64> = x
            .iter()
            .zip(&self.center)
            .map(|(xi, ci)| {
                let u2 = (xi - ci) * (xi - ci);
                (2.0 - 6.0 * u2) / (1.0 + u2).powi(3)
            })
            .collect();
        Ok(boxed_hessian(move |v: &[f64], out: &mut [f64]| {
            for ((o, vi), di) in out.iter_mut().zip(v).zip(&diag) {
                *o = vi * di;
            }
        }))
    }
}
