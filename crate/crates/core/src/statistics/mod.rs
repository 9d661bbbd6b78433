//! Moments and energies reconstructed from chaos coefficients, plus the
//! comparison metrics used against sampled estimates.

mod energy;
mod moments;

pub use energy::{
    averaged_energy, discrete_energy, energy_rate, energy_reference, validate_coefficient_energy, EnergySeries,
};
pub use moments::{gaussian_moment_oracle, higher_moments, mean_field, moment_field, second_moment, MomentField};

use crate::chaos::ChaosError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("coefficient {alpha} has magnitude {magnitude:e}; the solution is not Gaussian")]
    NonGaussian { alpha: String, magnitude: f64 },
    #[error("shape mismatch: {candidate} values against {reference}")]
    ShapeMismatch { candidate: usize, reference: usize },
    #[error("reference has zero norm")]
    ZeroReference,
    #[error("moment order {0} is not supported")]
    UnsupportedOrder(u32),
    #[error("frame {frame} requested, {frames} stored")]
    FrameOutOfRange { frame: usize, frames: usize },
    #[error("non-finite moment value")]
    NonFinite,
    #[error(transparent)]
    Chaos(#[from] ChaosError),
}

/// `||candidate - reference||_F / ||reference||_F`.
pub fn relative_error_frobenius(candidate: &[f64], reference: &[f64]) -> Result<f64, StatsError> {
    if candidate.len() != reference.len() {
        return Err(StatsError::ShapeMismatch { candidate: candidate.len(), reference: reference.len() });
    }
    let norm = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(StatsError::ZeroReference);
    }
    let diff = candidate.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(diff / norm)
}
