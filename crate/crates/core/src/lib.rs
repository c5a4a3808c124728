//! Two-metric adaptive projection (TMAP) for `min f(x) + gamma ||x||_1`.
//!
//! Each iteration splits the coordinates into a near-zero block handled by a
//! proximal-gradient step and a sign-definite block handled by a regularized
//! Newton step solved with truncated CG, then projects with an
//! iterate-dependent projection. Once the optimal sparsity pattern is found
//! the method reduces to a regularized Newton method on that pattern and
//! converges superlinearly.
//!
//! - [`prox`]: soft thresholding, stationarity residual, gradient map
//! - [`partition`]: index partition, shift vector, adaptive projection
//! - [`subproblem`]: regularization weight and the truncated-CG Newton solve
//! - [`solver`]: the main loop ([`solve`])
//! - [`safeguard`]: safeguarded variant with proximal-gradient fallback
//! - [`problems`]: logistic and least-squares oracles, partial DCT, generator
//! - [`libsvm`], [`trace`], [`analysis`], [`run`]: data ingestion, trace files,
//!   identification and rate analytics, and the benchmark driver

pub mod analysis;
pub mod error;
pub mod libsvm;
pub mod partition;
pub mod problems;
pub mod prox;
pub mod run;
pub mod safeguard;
pub mod solver;
pub mod subproblem;
pub mod trace;
mod vector;

pub use error::{Result, TmapError};
pub use problems::ProblemOracle;
pub use safeguard::{prox_grad_step, solve_prox_grad, solve_safeguarded, SafeguardStats};
pub use solver::{solve, IterationRecord, SolveReport, SolveStatus, SolverConfig};
pub use vector::DenseVector;
