//! Post-hoc analytics over solver traces: manifold identification and
//! empirical convergence order.

use crate::error::{Result, TmapError};
use crate::solver::IterationRecord;
use crate::vector::norm2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-independent hash of the active set `{i : x_i == 0}`.
///
/// Only exact zeros count; the adaptive projection produces exact zeros.
pub fn active_set_fingerprint(x: &[f64]) -> u64 {
    active_set_fingerprint_of(
        x.iter()
            .enumerate()
            .filter(|(_, v)| **v == 0.0)
            .map(|(i, _)| i),
    )
}

/// Fingerprint of an explicit index set, consistent with [`active_set_fingerprint`].
pub fn active_set_fingerprint_of<I: IntoIterator<Item = usize>>(indices: I) -> u64 {
    let (sum, count) = indices.into_iter().fold((0u64, 0u64), |(s, c), i| {
        (s.wrapping_add(splitmix64(i as u64)), c + 1)
    });
    splitmix64(sum ^ splitmix64(count))
}

/// `A(x) = {i : x_i == 0}`, ascending.
pub fn active_set(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v == 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Smallest `K` such that the active-set fingerprint is constant from row `K`
/// through the final row; `None` if the last two rows differ.
pub fn track_identification(trace: &[IterationRecord]) -> Option<usize> {
    let last = trace.last()?.active_set_fingerprint;
    let n = trace.len();
    let stable = trace
        .iter()
        .rev()
        .take_while(|r| r.active_set_fingerprint == last)
        .count();
    if n >= 2 && stable == 1 {
        None
    } else {
        Some(n - stable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    /// Median of `log(e_{k+1}/e_k) / log(e_k/e_{k-1})` over consecutive triples.
    pub order: f64,
    /// Last contraction ratio is below a tenth of the first one.
    pub superlinear: bool,
    /// Contraction ratios `e_{k+1} / e_k`.
    pub ratios: Vec<f64>,
}

/// `||x_k - x_star||` for every iterate.
pub fn error_sequence(iterates: &[Vec<f64>], x_star: &[f64]) -> Vec<f64> {
    iterates
        .iter()
        .map(|x| {
            let d: Vec<f64> = x.iter().zip(x_star).map(|(a, b)| a - b).collect();
            norm2(&d)
        })
        .collect()
}

/// Convergence order estimated from iterates against a reference solution.
pub fn estimate_rate(iterates: &[Vec<f64>], x_star: &[f64]) -> Result<RateEstimate> {
    estimate_rate_from_errors(&error_sequence(iterates, x_star))
}

/// Convergence order from an error sequence.
///
/// Uses the leading run of strictly positive errors; at least four are needed.
pub fn estimate_rate_from_errors(errors: &[f64]) -> Result<RateEstimate> {
    let usable: Vec<f64> = errors
        .iter()
        .copied()
        .take_while(|e| *e > 0.0 && e.is_finite())
        .collect();
    if usable.len() < 4 {
        return Err(TmapError::InsufficientData(format!(
            "need at least 4 positive errors, got {}",
            usable.len()
        )));
    }
    let ratios: Vec<f64> = usable.windows(2).map(|w| w[1] / w[0]).collect();
    let mut orders: Vec<f64> = usable
        .windows(3)
        .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
        .collect();
    orders.sort_by(f64::total_cmp);
    let mid = orders.len() / 2;
    let order = if orders.len().is_multiple_of(2) {
        0.5 * (orders[mid - 1] + orders[mid])
    } else {
        orders[mid]
    };
    let superlinear = ratios[ratios.len() - 1] < 0.1 * ratios[0];
    Ok(RateEstimate {
        order,
        superlinear,
        ratios,
    })
}
