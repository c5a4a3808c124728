//! Fixed benchmark instances.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tmap_core::problems::{
    generate_lasso_instance, LassoProblem, LogisticProblem, PartialDctOperator, SparseRowMatrix,
    SyntheticLassoParams,
};

pub fn synthetic_lasso(
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
) -> LassoProblem<PartialDctOperator> {
    let inst = generate_lasso_instance(&SyntheticLassoParams {
        n,
        m,
        k,
        seed,
        ..Default::default()
    })
    .expect("valid generator parameters");
    LassoProblem::new(inst.operator, inst.b).expect("consistent instance")
}

/// Gaussian features with roughly `density * n` nonzeros per row and labels
/// from a sparse planted model with 10% flips.
pub fn random_logistic(m: usize, n: usize, density: f64, seed: u64) -> LogisticProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..n)
        .map(|j| {
            if j % 10 == 0 {
                StandardNormal.sample(&mut rng)
            } else {
                0.0
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row = Vec::new();
        for j in 0..n {
            if rng.random_bool(density) {
                row.push((j, StandardNormal.sample(&mut rng)));
            }
        }
        let z: f64 = row.iter().map(|(j, v): &(usize, f64)| w[*j] * v).sum();
        let flip = rng.random_bool(0.1);
        labels.push(if (z >= 0.0) != flip { 1.0 } else { -1.0 });
        rows.push(row);
    }
    let a = SparseRowMatrix::from_rows(n, rows).expect("indices in range");
    LogisticProblem::new(a, labels).expect("labels are +-1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use tmap_core::ProblemOracle;

    #[test]
    fn fixtures_have_requested_shape() {
        assert_eq!(synthetic_lasso(128, 32, 4, 0).dim(), 128);
        let p = random_logistic(40, 30, 0.2, 1);
        assert_eq!((p.samples(), p.dim()), (40, 30));
    }
}
