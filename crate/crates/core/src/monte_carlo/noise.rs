use std::collections::HashMap;
use std::f64::consts::TAU;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chaos::{basis_m_antiderivative, BasisSpec, ChaosError, Slot};
use crate::propagator::TimeGrid;

/// Keeps the spectral variables out of the increment streams of the same seed.
const SPECTRAL_DOMAIN: u64 = 0x5eed_0f5e_c7a1_u64;

/// Each normal draw consumes two 64-bit outputs, i.e. four 32-bit ChaCha words.
const WORDS_PER_DRAW: u128 = 4;

fn keyed_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Box-Muller (cosine branch) from two raw words.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let a = rng.next_u64();
    let b = rng.next_u64();
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Brownian increment of `channel` (0-based) over `[t_step, t_step + dt]` of one
/// sample path; draw `step * channels + channel` of the `(seed, sample)` stream.
pub fn increment(master_seed: u64, sample_id: u64, step: usize, channel: usize, channels: usize, dt: f64) -> f64 {
    let mut rng = keyed_rng(master_seed, sample_id);
    rng.set_word_pos(WORDS_PER_DRAW * (step * channels + channel) as u128);
    dt.sqrt() * standard_normal(&mut rng)
}

/// Sequential reader of one sample's increments, equal draw for draw to [`increment`].
pub struct IncrementStream {
    rng: ChaCha8Rng,
    scale: f64,
    channels: usize,
}

impl IncrementStream {
    pub fn new(master_seed: u64, sample_id: u64, channels: usize, dt: f64) -> Self {
        Self { rng: keyed_rng(master_seed, sample_id), scale: dt.sqrt(), channels }
    }

    /// Increments of every channel for the next step.
    pub fn next_step(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.channels);
        for v in out.iter_mut() {
            *v = self.scale * standard_normal(&mut self.rng);
        }
    }
}

/// Increments `dW_k^n` of one sample path, step-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    channels: usize,
    increments: Vec<f64>,
}

impl NoisePath {
    pub fn generate(master_seed: u64, sample_id: u64, steps: usize, channels: usize, dt: f64) -> Self {
        let mut stream = IncrementStream::new(master_seed, sample_id, channels, dt);
        let mut increments = vec![0.0; steps * channels];
        for row in increments.chunks_exact_mut(channels.max(1)) {
            stream.next_step(row);
        }
        Self { channels, increments }
    }

    pub fn steps(&self) -> usize {
        self.increments.len().checked_div(self.channels).unwrap_or(0)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn get(&self, step: usize, channel: usize) -> f64 {
        self.increments[step * self.channels + channel]
    }

    /// `W_channel(t_step)` as the sum of the first `step` increments.
    pub fn wiener_value(&self, step: usize, channel: usize) -> f64 {
        (0..step).map(|n| self.get(n, channel)).sum()
    }
}

pub fn wiener_increments(master_seed: u64, sample_id: u64, time: &TimeGrid, channels: usize) -> NoisePath {
    NoisePath::generate(master_seed, sample_id, time.steps(), channels, time.dt())
}

/// Independent standard normals `xi[k][p - 1]` for `k < channels`, `p <= max_basis`.
pub fn spectral_draws(master_seed: u64, sample_id: u64, channels: usize, max_basis: u32) -> Vec<Vec<f64>> {
    let mut rng = keyed_rng(master_seed ^ SPECTRAL_DOMAIN, sample_id);
    (0..channels).map(|_| (0..max_basis).map(|_| standard_normal(&mut rng)).collect()).collect()
}

/// The same draws keyed by slot, for evaluating Wick polynomials.
pub fn spectral_slots(xi: &[Vec<f64>]) -> HashMap<Slot, f64> {
    let mut out = HashMap::new();
    for (k, row) in xi.iter().enumerate() {
        for (p, &v) in row.iter().enumerate() {
            out.insert(Slot { wiener: k as u32 + 1, basis: p as u32 + 1 }, v);
        }
    }
    out
}

/// Partial sums `W_k(t) = sum_p xi[k][p-1] int_0^t m_p ds`.
pub fn wiener_from_spectral(xi: &[Vec<f64>], t: f64, spec: &BasisSpec) -> Result<Vec<f64>, ChaosError> {
    let max_basis = xi.iter().map(Vec::len).max().unwrap_or(0);
    let weights = (1..=max_basis as u32).map(|p| basis_m_antiderivative(p, t, spec)).collect::<Result<Vec<_>, _>>()?;
    Ok(xi.iter().map(|row| row.iter().zip(&weights).map(|(x, w)| x * w).sum()).collect())
}
