//! Seeded experiment campaigns on top of `acos-core`: JSON configuration,
//! parallel multi-run execution, rank-sum statistics and CSV output.
//!
//! Results never depend on the thread count. Every run owns an RNG stream
//! whose seed is a stable hash of the campaign seed and the run's identity,
//! and results are collected in job order rather than completion order.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod seed;
pub mod stats;

pub use error::HarnessError;
