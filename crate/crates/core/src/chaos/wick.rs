use std::collections::HashMap;

use super::hermite::{hermite, ln_binomial, ln_factorial};
use super::{ChaosError, MultiIndex, Slot};

/// Weight of `u_{alpha-beta+rho} v_{beta+rho}` in the `T_alpha` coefficient of
/// a product of two chaos expansions:
///
/// `G = [C(alpha, beta) C(beta+rho, rho) C(alpha-beta+rho, rho)]^{1/2}`,
/// each binomial a product over slots.
pub fn wick_g(alpha: &MultiIndex, beta: &MultiIndex, rho: &MultiIndex) -> Result<f64, ChaosError> {
    let diff = alpha
        .checked_sub(beta)
        .ok_or_else(|| ChaosError::NotBelow { beta: beta.to_string(), alpha: alpha.to_string() })?;
    let mut ln_sum = 0.0;
    for (slot, a) in alpha.iter() {
        ln_sum += ln_binomial(a, beta.get(slot));
    }
    for (slot, r) in rho.iter() {
        let b = beta.get(slot);
        let d = diff.get(slot);
        ln_sum += ln_binomial(b + r, r) + ln_binomial(d + r, r);
    }
    Ok((0.5 * ln_sum).exp())
}

/// `T_alpha(xi) = prod H_{alpha_{k,p}}(xi_p^k) / sqrt(alpha_{k,p}!)`.
pub fn evaluate_wick_polynomial(alpha: &MultiIndex, xi: &HashMap<Slot, f64>) -> Result<f64, ChaosError> {
    let mut value = 1.0;
    for (slot, order) in alpha.iter() {
        let x = *xi.get(&slot).ok_or(ChaosError::MissingDraw(slot))?;
        value *= hermite(order, x) * (-0.5 * ln_factorial(order)).exp();
    }
    Ok(value)
}
