//! Proximal kernels for `h(x) = gamma * ||x||_1`.
//!
//! All comparisons are exact; tolerance handling belongs to the solver loop.

use crate::error::{check_len, Result, TmapError};
use crate::vector::norm2;

/// Regularization weight and step scale for one prox evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxParams {
    gamma: f64,
    t: f64,
}

impl ProxParams {
    pub fn new(gamma: f64, t: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(TmapError::Parameter(format!(
                "gamma must be >= 0, got {gamma}"
            )));
        }
        if !t.is_finite() || t <= 0.0 {
            return Err(TmapError::Parameter(format!("t must be > 0, got {t}")));
        }
        Ok(Self { gamma, t })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Threshold applied by the prox, `t * gamma`.
    pub fn threshold(&self) -> f64 {
        self.t * self.gamma
    }
}

/// `sign(v) * max(|v| - theta, 0)`.
#[inline]
pub fn soft_threshold(v: f64, theta: f64) -> f64 {
    if v > theta {
        v - theta
    } else if v < -theta {
        v + theta
    } else {
        0.0
    }
}

/// Componentwise soft thresholding with threshold `t * gamma`.
pub fn prox_l1(x: &[f64], params: ProxParams) -> Vec<f64> {
    let theta = params.threshold();
    x.iter().map(|&v| soft_threshold(v, theta)).collect()
}

/// Stationarity residual `x - prox_h(x - g)` and its Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub vector: Vec<f64>,
    pub norm: f64,
}

/// Computes `x - prox_{gamma ||.||_1}(x - g)`.
///
/// The norm is zero exactly when every coordinate satisfies the first-order
/// optimality conditions: `g_i = -gamma sign(x_i)` where `x_i != 0` and
/// `|g_i| <= gamma` where `x_i == 0`.
pub fn stationarity_residual(x: &[f64], g: &[f64], gamma: f64) -> Result<Residual> {
    check_len(x.len(), g.len())?;
    let vector: Vec<f64> = x
        .iter()
        .zip(g)
        .map(|(&xi, &gi)| xi - soft_threshold(xi - gi, gamma))
        .collect();
    let norm = norm2(&vector);
    Ok(Residual { vector, norm })
}

/// Gradient map `(x - prox_{t h}(x - t g)) / t` on the subvector indexed by `I+`.
pub fn gradient_map(x_plus: &[f64], g_plus: &[f64], t: f64, gamma: f64) -> Result<Vec<f64>> {
    check_len(x_plus.len(), g_plus.len())?;
    let params = ProxParams::new(gamma, t)?;
    let theta = params.threshold();
    Ok(x_plus
        .iter()
        .zip(g_plus)
        .map(|(&xi, &gi)| (xi - soft_threshold(xi - t * gi, theta)) / t)
        .collect())
}
