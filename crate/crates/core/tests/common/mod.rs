#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tmap_core::problems::{LogisticProblem, SparseRowMatrix};
use tmap_core::ProblemOracle;

/// Dense Gaussian features, labels from a sparse planted model with 10% flips.
pub fn random_logistic(m: usize, n: usize, seed: u64) -> LogisticProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..n)
        .map(|j| {
            if j % 5 == 0 {
                StandardNormal.sample(&mut rng)
            } else {
                0.0f64
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let z: f64 = a.iter().zip(&w).map(|(x, y)| x * y).sum();
        let flip = rng.random_bool(0.1);
        labels.push(if (z >= 0.0) != flip { 1.0 } else { -1.0 });
        rows.push(a.into_iter().enumerate().collect());
    }
    LogisticProblem::new(SparseRowMatrix::from_rows(n, rows).unwrap(), labels).unwrap()
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

/// Largest central-difference gradient error, relative to `max(1, |g_i|)`.
pub fn fd_gradient_error<O: ProblemOracle + ?Sized>(oracle: &O, x: &[f64]) -> f64 {
    let h = 1e-6;
    let mut g = vec![0.0; x.len()];
    oracle.value_grad(x, &mut g);
    let mut worst: f64 = 0.0;
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = oracle.value(&xp);
        xp[i] = x[i] - h;
        let fm = oracle.value(&xp);
        xp[i] = x[i];
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
    }
    worst
}

/// Relative error of `∇²f(x) v` against a central difference of gradients.
pub fn fd_hessvec_error<O: ProblemOracle + ?Sized>(oracle: &O, x: &[f64], v: &[f64]) -> f64 {
    let h = 1e-5;
    let n = x.len();
    let hv = oracle.hessvec(x, v).unwrap();
    let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let (mut gp, mut gm) = (vec![0.0; n], vec![0.0; n]);
    oracle.value_grad(&xp, &mut gp);
    oracle.value_grad(&xm, &mut gm);
    let diff: f64 = (0..n)
        .map(|i| {
            let fd = (gp[i] - gm[i]) / (2.0 * h);
            (fd - hv[i]) * (fd - hv[i])
        })
        .sum::<f64>()
        .sqrt();
    let scale = hv.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
    diff / scale
}
