use std::f64::consts::PI;

use super::ChaosError;

/// Cosine orthonormal system on `[0, T]`:
/// `m_1 = 1/sqrt(T)`, `m_p = sqrt(2/T) cos((p-1) pi t / T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    horizon: f64,
}

impl BasisSpec {
    pub fn new(horizon: f64) -> Result<Self, ChaosError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ChaosError::InvalidHorizon(horizon));
        }
        Ok(Self { horizon })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn check(&self, p: u32, t: f64) -> Result<(), ChaosError> {
        if p == 0 {
            return Err(ChaosError::ZeroBasisIndex);
        }
        if !(0.0..=self.horizon).contains(&t) {
            return Err(ChaosError::TimeOutOfRange { t, horizon: self.horizon });
        }
        Ok(())
    }
}

pub fn basis_m(p: u32, t: f64, spec: &BasisSpec) -> Result<f64, ChaosError> {
    spec.check(p, t)?;
    let horizon = spec.horizon;
    if p == 1 {
        return Ok(1.0 / horizon.sqrt());
    }
    let freq = f64::from(p - 1) * PI / horizon;
    Ok((2.0 / horizon).sqrt() * (freq * t).cos())
}

/// Closed form of `int_0^t m_p(s) ds`.
pub fn basis_m_antiderivative(p: u32, t: f64, spec: &BasisSpec) -> Result<f64, ChaosError> {
    spec.check(p, t)?;
    let horizon = spec.horizon;
    if p == 1 {
        return Ok(t / horizon.sqrt());
    }
    let k = f64::from(p - 1) * PI;
    Ok((2.0 * horizon).sqrt() / k * (k * t / horizon).sin())
}
