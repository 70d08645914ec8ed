//! Radio energy arithmetic.
//!
//! [`link_cost`] is the two-branch first-order model used for every data
//! transmission in the simulator: electronics plus aggregation per bit, plus an
//! amplifier term that grows with d² up to the crossover distance and with d⁴
//! beyond it. [`tx_energy_linear`] is the alternative linear transmit model and
//! is kept separate; it is never mixed into [`link_cost`].

use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use thiserror::Error;

use crate::model::EnergyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EnergyError {
    #[error("bit count must be at least 1")]
    ZeroBits,
    #[error("distance must be finite and non-negative")]
    InvalidDistance,
}

/// Energy in joules. Always finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Cost(f64);

impl Cost {
    pub const ZERO: Cost = Cost(0.0);

    pub fn joules(self) -> f64 {
        self.0
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} J", self.0)
    }
}

fn check(m_bits: u32, d: f64) -> Result<(), EnergyError> {
    if m_bits == 0 {
        return Err(EnergyError::ZeroBits);
    }
    if !d.is_finite() || d < 0.0 {
        return Err(EnergyError::InvalidDistance);
    }
    Ok(())
}

/// Cost of sending `m_bits` over `d` meters:
/// `(e_t + e_d)·M + e_f·M·d²` for `d <= d_o`, else `(e_t + e_d)·M + e_m·M·d⁴`.
pub fn link_cost(params: &EnergyParams, m_bits: u32, d: f64) -> Result<Cost, EnergyError> {
    check(m_bits, d)?;
    let m = f64::from(m_bits);
    let fixed = (params.e_t + params.e_d) * m;
    let amp = if d <= crossover_distance(params) {
        params.e_f * m * d * d
    } else {
        params.e_m * m * d.powi(4)
    };
    Ok(Cost(fixed + amp))
}

/// Linear transmit model: `e_e·M + e_a·alpha·d`.
pub fn tx_energy_linear(params: &EnergyParams, m_bits: u32, d: f64) -> Result<Cost, EnergyError> {
    check(m_bits, d)?;
    Ok(Cost(
        params.e_e * f64::from(m_bits) + params.e_a * params.alpha * d,
    ))
}

/// Receive electronics for `m_bits`.
pub fn rx_energy(params: &EnergyParams, m_bits: u32) -> Result<Cost, EnergyError> {
    if m_bits == 0 {
        return Err(EnergyError::ZeroBits);
    }
    Ok(Cost(params.e_r * f64::from(m_bits)))
}

/// Aggregation energy for `m_bits` received bits.
pub fn aggregation_energy(params: &EnergyParams, m_bits: u32) -> Cost {
    Cost(params.e_d * f64::from(m_bits))
}

/// `sqrt(e_f / e_m)`, the distance where both amplifier branches agree.
pub fn crossover_distance(params: &EnergyParams) -> f64 {
    (params.e_f / params.e_m).sqrt()
}
