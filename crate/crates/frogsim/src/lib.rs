//! Simulation and numerical certification toolkit for the frog model on
//! d-ary trees.
//!
//! The crate has three layers:
//!
//! * **Engines** ([`engine`], [`selfsimilar`], [`walks`], [`tree`]):
//!   deterministic, counter-keyed Monte Carlo simulation of the frog model
//!   under simple random walk, non-backtracking, and self-similar path
//!   regimes, with censoring-aware root-visit records.
//! * **Operators** ([`operators`], [`dominance`]): the star-graph recursion
//!   operators evaluated exactly where closed forms exist and by Monte Carlo
//!   otherwise, plus a Poisson-mixture stochastic-dominance criterion with a
//!   brute-force, tail-certified comparison oracle.
//! * **Certificates** ([`bootstrap`]): recurrence certificates for the
//!   binary tree and for general d, the d₀ search for the linear-in-d
//!   regime, and derivative-free optimization of the certificate constants.
//!
//! Trials parallelize across a rayon pool when the `parallel` feature
//! (default) is enabled; a sequential fallback is always compiled and the
//! two paths produce bit-identical results.

pub mod bootstrap;
pub mod cli;
pub mod dominance;
pub mod engine;
pub mod operators;
pub mod rng;
pub mod selfsimilar;
pub mod tree;
pub mod walks;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum FrogError {
    /// A precondition on an operation's arguments was violated.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A configuration field failed validation.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    /// Requested constants admit no certificate.
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FrogError {
    pub(crate) fn argument(message: String) -> Self {
        FrogError::Argument(message)
    }

    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        FrogError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, FrogError>;

/// Runs a closure over trial indices, in parallel when the `parallel`
/// feature is enabled, collecting results in trial order regardless of
/// schedule. The sequential path is always available for benchmarking.
pub(crate) fn map_trials<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_trials_sequential(trials, f)
    }
}

/// Sequential fallback for [`map_trials`]; exposed for the benchmark suite.
pub fn map_trials_sequential<T, F>(trials: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..trials).map(f).collect()
}
