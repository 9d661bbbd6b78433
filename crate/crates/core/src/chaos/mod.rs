//! Randomness-free chaos machinery: Hermite polynomials, the cosine basis on
//! `[0, T]`, multi-indices, truncated index sets and Wick product weights.

mod basis;
mod hermite;
mod multi_index;
mod truncation;
mod wick;

pub use basis::{basis_m, basis_m_antiderivative, BasisSpec};
pub use hermite::{hermite, ln_binomial, ln_factorial};
pub use multi_index::{MultiIndex, Slot};
pub use truncation::{truncation_count, TruncationSet};
pub use wick::{evaluate_wick_polynomial, wick_g};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChaosError {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("basis indices start at 1")]
    ZeroBasisIndex,
    #[error("at least one Wiener channel is required")]
    ZeroWienerCount,
    #[error("slot ({wiener}, {basis}) is not 1-based")]
    ZeroSlot { wiener: u32, basis: u32 },
    #[error("truncation set for K={num_wiener}, N={max_order}, I={max_basis} is too large to enumerate")]
    TruncationOverflow { num_wiener: u32, max_order: u32, max_basis: u32 },
    #[error("{beta} is not componentwise below {alpha}")]
    NotBelow { beta: String, alpha: String },
    #[error("no Gaussian draw supplied for slot ({}, {})", .0.wiener, .0.basis)]
    MissingDraw(Slot),
}
