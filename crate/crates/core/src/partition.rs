//! Adaptive index partition, shift vector and adaptive projection.
//!
//! Given an iterate `x`, gradient `g`, accuracy level `eps` and weight `gamma`,
//! every coordinate is put in exactly one of
//!
//! - `I+`: near zero and treated by a first-order prox step,
//! - `I-+`: safely positive (or pushed positive by a gradient `<= -gamma`),
//! - `I--`: safely negative (or pushed negative by a gradient `>= gamma`),
//!
//! using the band width `eps_k = min(eps, pi)` where `pi` is the norm of the
//! stationarity residual at `x`.

use crate::error::{check_len, Result, TmapError};
use crate::prox::{soft_threshold, stationarity_residual};

/// Which block of the partition a coordinate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    Plus,
    MinusPos,
    MinusNeg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexPartition {
    /// `I+`, ascending, 0-based.
    pub i_plus: Vec<usize>,
    /// `I-+`, ascending, 0-based.
    pub i_minus_pos: Vec<usize>,
    /// `I--`, ascending, 0-based.
    pub i_minus_neg: Vec<usize>,
    pub pi: f64,
    pub eps_k: f64,
    blocks: Vec<Block>,
}

impl IndexPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, i: usize) -> Block {
        self.blocks[i]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `I- = I-+ ∪ I--`, ascending.
    pub fn i_minus(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != Block::Plus)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn minus_len(&self) -> usize {
        self.i_minus_pos.len() + self.i_minus_neg.len()
    }
}

fn classify(xi: f64, gi: f64, eps_k: f64, gamma: f64) -> Block {
    if (xi.abs() <= eps_k && gi.abs() < gamma)
        || (-eps_k <= xi && xi < 0.0 && gi <= -gamma)
        || (0.0 < xi && xi <= eps_k && gi >= gamma)
    {
        Block::Plus
    } else if xi > eps_k || (0.0 <= xi && xi <= eps_k && gi <= -gamma) {
        Block::MinusPos
    } else {
        // Remaining cases: xi < -eps_k, or -eps_k <= xi <= 0 with gi >= gamma.
        Block::MinusNeg
    }
}

/// Partitions `{0..n}` for the iterate `x` with gradient `g`.
pub fn compute_partition(x: &[f64], g: &[f64], eps: f64, gamma: f64) -> Result<IndexPartition> {
    let pi = stationarity_residual(x, g, gamma)?.norm;
    partition_with_pi(x, g, eps, gamma, pi)
}

/// Same as [`compute_partition`] with a precomputed residual norm `pi`.
pub fn partition_with_pi(
    x: &[f64],
    g: &[f64],
    eps: f64,
    gamma: f64,
    pi: f64,
) -> Result<IndexPartition> {
    check_len(x.len(), g.len())?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(TmapError::Parameter(format!("eps must be > 0, got {eps}")));
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(TmapError::Parameter(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    let eps_k = eps.min(pi);
    let blocks: Vec<Block> = x
        .iter()
        .zip(g)
        .map(|(&xi, &gi)| classify(xi, gi, eps_k, gamma))
        .collect();
    let collect = |want: Block| -> Vec<usize> {
        blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| **b == want)
            .map(|(i, _)| i)
            .collect()
    };
    Ok(IndexPartition {
        i_plus: collect(Block::Plus),
        i_minus_pos: collect(Block::MinusPos),
        i_minus_neg: collect(Block::MinusNeg),
        pi,
        eps_k,
        blocks,
    })
}

/// Shift vector: `gamma` on `I-+`, `-gamma` on `I--`, zero on `I+`.
pub fn omega(part: &IndexPartition, gamma: f64, n: usize) -> Result<Vec<f64>> {
    check_len(part.len(), n)?;
    Ok(part
        .blocks
        .iter()
        .map(|b| match b {
            Block::Plus => 0.0,
            Block::MinusPos => gamma,
            Block::MinusNeg => -gamma,
        })
        .collect())
}

/// Applies the adaptive projection componentwise: clamp at zero from below on
/// `I-+`, from above on `I--`, and soft threshold by `t * gamma` on `I+`.
pub fn adaptive_project(v: &[f64], part: &IndexPartition, t: f64, gamma: f64) -> Result<Vec<f64>> {
    check_len(part.len(), v.len())?;
    if t.is_nan() || t <= 0.0 {
        return Err(TmapError::Parameter(format!("t must be > 0, got {t}")));
    }
    let theta = t * gamma;
    Ok(v.iter()
        .zip(&part.blocks)
        .map(|(&vi, b)| match b {
            Block::MinusPos => vi.max(0.0),
            Block::MinusNeg => vi.min(0.0),
            Block::Plus => soft_threshold(vi, theta),
        })
        .collect())
}
