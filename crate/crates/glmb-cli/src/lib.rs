//! Experiment-runner library behind the `glmb` binary: configuration
//! loading, Monte Carlo execution, and summary handling.

pub mod config;
pub mod runner;
pub mod summary;
