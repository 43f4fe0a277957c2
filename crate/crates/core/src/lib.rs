//! Adaptive coordinate-system switching for particle swarm optimization and
//! differential evolution.
//!
//! Every offspring is generated either in the fixed axis-aligned frame or in
//! the Eigen frame of a covariance matrix learned from an archive of recent
//! offspring. A per-individual probability vector decides which frame is used
//! and is rewarded or punished according to the offspring's outcome.
//!
//! The crate is `no_std` and only needs `alloc`. Objective evaluation, RNG
//! streams and all state live in caller-owned values; IO belongs to the
//! `acos-harness` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algorithms;
pub mod benchmarks;
pub mod coordinate;
mod error;
pub mod linalg;
pub mod operators;
pub mod selector;

pub use error::{Error, Result};

/// The RNG every run owns. ChaCha8 keeps streams identical across platforms.
pub type RunRng = rand_chacha::ChaCha8Rng;

/// A minimization objective over a boxed domain.
pub trait Objective {
    fn dim(&self) -> usize;
    fn bounds(&self) -> &operators::SearchBounds;
    fn evaluate(&self, x: &[f64]) -> f64;
}
