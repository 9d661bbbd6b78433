//! Euler-Maruyama reference estimator with counter-keyed random streams.
//!
//! Increments are keyed by `(master_seed, sample, step, channel)`; samples are
//! accumulated in fixed blocks and merged along a fixed binary tree, so the
//! output is bitwise identical for any worker count.

mod noise;
mod sampler;

pub use noise::{
    increment, spectral_draws, spectral_slots, wiener_from_spectral, wiener_increments, IncrementStream, NoisePath,
};
pub use sampler::{mc_run, McOptions, McResult, SampleAccumulator, BLOCK_SAMPLES};
