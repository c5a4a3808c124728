//! Partial orthonormal DCT measurement operator.
//!
//! `A x = (C x)_J` where `C` is the orthonormal type-II DCT of length `n` and
//! `J` selects `m` distinct rows. Since `C` is orthogonal, `A A^T = I_m` and
//! the adjoint is the orthonormal type-III transform of the zero-filled
//! measurement vector.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use super::LinearOperator;
use crate::error::{Result, TmapError};

#[derive(Clone)]
pub struct PartialDctOperator {
    n: usize,
    rows: Vec<usize>,
    plan: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for PartialDctOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialDctOperator")
            .field("n", &self.n)
            .field("m", &self.rows.len())
            .finish()
    }
}

impl PartialEq for PartialDctOperator {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rows == other.rows
    }
}

fn scale(k: usize, n: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

impl PartialDctOperator {
    /// `rows` are 0-based indices into `0..n`; they must be distinct.
    pub fn new(n: usize, rows: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(TmapError::Parameter("DCT length must be positive".into()));
        }
        if rows.len() > n {
            return Err(TmapError::Parameter(format!(
                "{} measurements exceed signal length {n}",
                rows.len()
            )));
        }
        let mut seen = vec![false; n];
        for &j in &rows {
            if j >= n {
                return Err(TmapError::Parameter(format!("row index {j} out of range")));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(TmapError::Parameter(format!("duplicate row index {j}")));
            }
        }
        let plan = DctPlanner::new().plan_dct2(n);
        Ok(Self { n, rows, plan })
    }

    /// Operator selecting every row, i.e. the full orthonormal DCT.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, (0..n).collect())
    }

    pub fn signal_len(&self) -> usize {
        self.n
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.rows
    }

    /// Full orthonormal DCT-II of `x`.
    pub fn dct2(&self, x: &[f64]) -> Vec<f64> {
        let mut buf = x.to_vec();
        self.plan.process_dct2(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= scale(k, self.n);
        }
        buf
    }

    /// Full orthonormal DCT-III of `y`, the inverse of [`Self::dct2`].
    pub fn dct3(&self, y: &[f64]) -> Vec<f64> {
        // rustdct's DCT-III halves the first coefficient and does not scale.
        let mut buf: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(k, v)| v * scale(k, self.n))
            .collect();
        buf[0] *= 2.0;
        self.plan.process_dct3(&mut buf);
        buf
    }
}

impl LinearOperator for PartialDctOperator {
    fn rows(&self) -> usize {
        self.rows.len()
    }
    fn cols(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let full = self.dct2(x);
        for (o, &j) in out.iter_mut().zip(&self.rows) {
            *o = full[j];
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        let mut full = vec![0.0; self.n];
        for (&yi, &j) in y.iter().zip(&self.rows) {
            full[j] = yi;
        }
        out.copy_from_slice(&self.dct3(&full));
    }
}

/// O(n^2) orthonormal DCT-II, kept as a cross-check for the fast path.
pub fn dct2_reference(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(j, v)| v * (PI * k as f64 * (2 * j + 1) as f64 / (2 * n) as f64).cos())
                .sum();
            scale(k, n) * s
        })
        .collect()
}

/// O(n^2) orthonormal DCT-III (transpose of [`dct2_reference`]).
pub fn dct3_reference(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|j| {
            y.iter()
                .enumerate()
                .map(|(k, v)| {
                    scale(k, n) * v * (PI * k as f64 * (2 * j + 1) as f64 / (2 * n) as f64).cos()
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{dot, norm2};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn fast_path_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 3, 8, 17, 64, 100, 1024] {
            let op = PartialDctOperator::full(n).unwrap();
            let x = random(&mut rng, n);
            let (fast, slow) = (op.dct2(&x), dct2_reference(&x));
            let (fast3, slow3) = (op.dct3(&x), dct3_reference(&x));
            for i in 0..n {
                assert!((fast[i] - slow[i]).abs() < 1e-10, "dct2 n={n} i={i}");
                assert!((fast3[i] - slow3[i]).abs() < 1e-10, "dct3 n={n} i={i}");
            }
        }
    }

    #[test]
    fn first_basis_vector_has_unit_image() {
        let n = 16;
        let op = PartialDctOperator::full(n).unwrap();
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let mut out = vec![0.0; n];
        op.apply(&e1, &mut out);
        assert!((norm2(&out) - 1.0).abs() < 1e-12);
        assert!((out[0] - scale(0, n)).abs() < 1e-12);
    }

    #[test]
    fn full_adjoint_inverts_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 256;
        let op = PartialDctOperator::full(n).unwrap();
        let x = random(&mut rng, n);
        let mut y = vec![0.0; n];
        let mut back = vec![0.0; n];
        op.apply(&x, &mut y);
        op.adjoint(&y, &mut back);
        for i in 0..n {
            assert!((back[i] - x[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_adjoint_consistency_and_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 512;
        let rows: Vec<usize> = rand::seq::index::sample(&mut rng, n, 64).into_vec();
        let op = PartialDctOperator::new(n, rows).unwrap();
        let x = random(&mut rng, n);
        let y = random(&mut rng, 64);
        let mut ax = vec![0.0; 64];
        let mut aty = vec![0.0; n];
        op.apply(&x, &mut ax);
        op.adjoint(&y, &mut aty);
        assert!((dot(&ax, &y) - dot(&x, &aty)).abs() < 1e-10);
        assert!(norm2(&ax) <= norm2(&x));
        // A A^T = I on the selected rows.
        let mut aaty = vec![0.0; 64];
        op.apply(&aty, &mut aaty);
        for i in 0..64 {
            assert!((aaty[i] - y[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(PartialDctOperator::new(4, vec![0, 0]).is_err());
        assert!(PartialDctOperator::new(4, vec![4]).is_err());
        assert!(PartialDctOperator::new(2, vec![0, 1, 1]).is_err());
    }
}
